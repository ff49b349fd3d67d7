//! Names of every tracked energy quantity.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    T,
    TLambda,
    TRho,
    TRot,
    TI,
    TXi,
    TExt,
    TInt,
    TRes,
    TJ,
    TK,
    TAc,
    EOut,
    EOutA,
    EOutB,
    EIn,
    EInA,
    EInB,
    EC,
    TResPos,
    TResNeg,
    TAcPos,
    TAcNeg,
    ECPos,
    ECNeg,
    TResAbs,
    TAcAbs,
}

impl Term {
    /// The 19 terms of the five partitions, in report order.
    pub const PARTITION: [Term; 19] = [
        Term::T,
        Term::TLambda,
        Term::TRho,
        Term::TRot,
        Term::TI,
        Term::TXi,
        Term::TExt,
        Term::TInt,
        Term::TRes,
        Term::TJ,
        Term::TK,
        Term::TAc,
        Term::EOut,
        Term::EOutA,
        Term::EOutB,
        Term::EIn,
        Term::EInA,
        Term::EInB,
        Term::EC,
    ];

    /// Everything the Monte Carlo harness accumulates.
    pub const TRACKED: [Term; 27] = [
        Term::T,
        Term::TLambda,
        Term::TRho,
        Term::TRot,
        Term::TI,
        Term::TXi,
        Term::TExt,
        Term::TInt,
        Term::TRes,
        Term::TJ,
        Term::TK,
        Term::TAc,
        Term::EOut,
        Term::EOutA,
        Term::EOutB,
        Term::EIn,
        Term::EInA,
        Term::EInB,
        Term::EC,
        Term::TResPos,
        Term::TResNeg,
        Term::TAcPos,
        Term::TAcNeg,
        Term::ECPos,
        Term::ECNeg,
        Term::TResAbs,
        Term::TAcAbs,
    ];

    /// The bounded terms with a closed-form mean for equal masses.
    pub const BOUNDED: [Term; 13] = [
        Term::TLambda,
        Term::TRho,
        Term::TRot,
        Term::TI,
        Term::TXi,
        Term::TExt,
        Term::TInt,
        Term::TRes,
        Term::TJ,
        Term::TK,
        Term::TAc,
        Term::EOutB,
        Term::EInB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Term::T => "T",
            Term::TLambda => "T_Lambda",
            Term::TRho => "T_rho",
            Term::TRot => "T_rot",
            Term::TI => "T_I",
            Term::TXi => "T_xi",
            Term::TExt => "T_ext",
            Term::TInt => "T_int",
            Term::TRes => "T_res",
            Term::TJ => "T_J",
            Term::TK => "T_K",
            Term::TAc => "T_ac",
            Term::EOut => "E_out",
            Term::EOutA => "E_outA",
            Term::EOutB => "E_outB",
            Term::EIn => "E_in",
            Term::EInA => "E_inA",
            Term::EInB => "E_inB",
            Term::EC => "E_c",
            Term::TResPos => "T_res+",
            Term::TResNeg => "T_res-",
            Term::TAcPos => "T_ac+",
            Term::TAcNeg => "T_ac-",
            Term::ECPos => "E_c+",
            Term::ECNeg => "E_c-",
            Term::TResAbs => "|T_res|",
            Term::TAcAbs => "|T_ac|",
        }
    }

    /// Terms of the singular value expansion, undefined at repeated positive
    /// singular values.
    pub fn needs_distinct_singular_values(self) -> bool {
        matches!(
            self,
            Term::EOut
                | Term::EOutA
                | Term::EOutB
                | Term::EIn
                | Term::EInA
                | Term::EInB
                | Term::EC
                | Term::ECPos
                | Term::ECNeg
        )
    }

    /// Terms that can be arbitrarily large at fixed `T`.
    pub fn is_unbounded(self) -> bool {
        matches!(
            self,
            Term::EOut | Term::EOutA | Term::EIn | Term::EInA | Term::EC | Term::ECNeg
        )
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Term::TRACKED
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownTerm(s.to_string()))
    }
}
