use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which connectives a fragment admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Full,
    Existential,
    Positive,
    ExistentialPositive,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::Full,
        Mode::Existential,
        Mode::Positive,
        Mode::ExistentialPositive,
    ];

    /// Universal quantifiers and boxes are admitted.
    pub fn allows_universal(self) -> bool {
        matches!(self, Mode::Full | Mode::Positive)
    }

    /// Negated atoms, equalities and propositions are admitted.
    pub fn allows_negation(self) -> bool {
        matches!(self, Mode::Full | Mode::Existential)
    }

    /// Games in this mode maintain a partial isomorphism rather than a
    /// partial homomorphism.
    pub fn iso_condition(self) -> bool {
        self.allows_negation()
    }

    /// Spoiler may choose which structure to play in.
    pub fn spoiler_plays_both(self) -> bool {
        self.allows_universal()
    }

    /// Every mode whose fragment is contained in this one's.
    pub fn weaker_modes(self) -> &'static [Mode] {
        match self {
            Mode::Full => &[Mode::Existential, Mode::Positive, Mode::ExistentialPositive],
            Mode::Existential | Mode::Positive => &[Mode::ExistentialPositive],
            Mode::ExistentialPositive => &[],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Existential => "existential",
            Mode::Positive => "positive",
            Mode::ExistentialPositive => "ep",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "full" => Ok(Mode::Full),
            "existential" => Ok(Mode::Existential),
            "positive" => Ok(Mode::Positive),
            "ep" | "existential-positive" => Ok(Mode::ExistentialPositive),
            _ => Err(Error::Precondition(format!("unknown mode {s}"))),
        }
    }
}

/// The resource being bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Quantifier rank.
    Rank,
    /// Number of variables.
    Variables,
    /// Modal depth.
    ModalDepth,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Rank => "rank",
            Family::Variables => "variables",
            Family::ModalDepth => "modal-depth",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FragmentSpec {
    pub family: Family,
    pub k: usize,
    pub mode: Mode,
}

impl FragmentSpec {
    pub fn new(family: Family, k: usize, mode: Mode) -> Result<Self> {
        if family == Family::Variables && k == 0 {
            return Err(Error::Precondition(
                "the variable fragment needs k >= 1".into(),
            ));
        }
        Ok(FragmentSpec { family, k, mode })
    }
}

impl fmt::Display for FragmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} k={}", self.family, self.mode, self.k)
    }
}
