use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::logic::formula::{Formula, Var};
use crate::logic::fragment::{Family, FragmentSpec, Mode};
use crate::structure::{Elem, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameFamily {
    /// Ehrenfeucht-Fraïssé game with `k` rounds.
    Ef,
    /// `k`-pebble game.
    Pebble,
    /// Bisimulation game with `k` rounds on pointed Kripke models.
    Modal,
}

impl GameFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            GameFamily::Ef => "ef",
            GameFamily::Pebble => "pebble",
            GameFamily::Modal => "modal",
        }
    }
}

impl fmt::Display for GameFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ef" => Ok(GameFamily::Ef),
            "pebble" => Ok(GameFamily::Pebble),
            "modal" => Ok(GameFamily::Modal),
            _ => Err(Error::Precondition(format!("unknown game family {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameSpec {
    pub family: GameFamily,
    pub mode: Mode,
    /// Rounds (EF, modal) or pebbles.
    pub k: usize,
    /// Pebble only: play a fixed number of rounds instead of forever.
    pub rounds: Option<usize>,
}

impl GameSpec {
    pub fn ef(mode: Mode, k: usize) -> Self {
        GameSpec {
            family: GameFamily::Ef,
            mode,
            k,
            rounds: None,
        }
    }

    pub fn pebble(mode: Mode, k: usize) -> Self {
        GameSpec {
            family: GameFamily::Pebble,
            mode,
            k,
            rounds: None,
        }
    }

    pub fn pebble_bounded(mode: Mode, k: usize, rounds: usize) -> Self {
        GameSpec {
            family: GameFamily::Pebble,
            mode,
            k,
            rounds: Some(rounds),
        }
    }

    pub fn modal(mode: Mode, k: usize) -> Self {
        GameSpec {
            family: GameFamily::Modal,
            mode,
            k,
            rounds: None,
        }
    }

    /// The logic fragment this game characterizes.
    pub fn fragment(&self) -> FragmentSpec {
        let family = match self.family {
            GameFamily::Ef => Family::Rank,
            GameFamily::Pebble => Family::Variables,
            GameFamily::Modal => Family::ModalDepth,
        };
        FragmentSpec {
            family,
            k: self.k,
            mode: self.mode,
        }
    }

    pub(crate) fn validate(&self, a: &Structure, b: &Structure) -> Result<()> {
        if a.vocab() != b.vocab() {
            return Err(Error::VocabularyMismatch(format!(
                "[{}] vs [{}]",
                a.vocab(),
                b.vocab()
            )));
        }
        match self.family {
            GameFamily::Modal => {
                if !a.vocab().is_modal() {
                    return Err(Error::NonModalVocabulary);
                }
                if a.point().is_none() || b.point().is_none() {
                    return Err(Error::MissingPoint);
                }
            }
            GameFamily::Pebble if self.k == 0 => {
                return Err(Error::Precondition(
                    "the pebble game needs at least one pebble".into(),
                ))
            }
            _ => {}
        }
        if self.rounds.is_some() && self.family != GameFamily::Pebble {
            return Err(Error::Precondition(
                "a round bound applies to pebble games only".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} k={}", self.family, self.mode, self.k)?;
        if let Some(n) = self.rounds {
            write!(f, " rounds={n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

/// A Spoiler move. `pebble` is set for pebble games (0-based), `relation`
/// for modal games.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub side: Side,
    pub pebble: Option<usize>,
    pub relation: Option<usize>,
    pub elem: Elem,
}

/// Why a set of pairs fails the winning condition. Indices refer to the
/// list of pairs the check was run on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Equal in `A`, different in `B`.
    Functionality {
        i: usize,
        j: usize,
    },
    /// Different in `A`, equal in `B`.
    Injectivity {
        i: usize,
        j: usize,
    },
    NotPreserved {
        rel: usize,
        idx: Vec<usize>,
    },
    NotReflected {
        rel: usize,
        idx: Vec<usize>,
    },
    /// Modal: proposition true at the `A` world only.
    PropNotPreserved {
        rel: usize,
    },
    /// Modal: proposition true at the `B` world only.
    PropNotReflected {
        rel: usize,
    },
}

impl Violation {
    /// A literal true in `A` and false in `B` at the offending pairs;
    /// `var` names the variable of each pair index.
    pub fn literal(&self, a: &Structure, var: impl Fn(usize) -> Var) -> Formula {
        let name = |r: usize| a.vocab().name(r).to_string();
        match self {
            Violation::Functionality { i, j } => Formula::Eq(var(*i), var(*j)),
            Violation::Injectivity { i, j } => Formula::NegEq(var(*i), var(*j)),
            Violation::NotPreserved { rel, idx } => {
                Formula::Atom(name(*rel), idx.iter().map(|&i| var(i)).collect())
            }
            Violation::NotReflected { rel, idx } => {
                Formula::NegAtom(name(*rel), idx.iter().map(|&i| var(i)).collect())
            }
            Violation::PropNotPreserved { rel } => Formula::Prop(name(*rel)),
            Violation::PropNotReflected { rel } => Formula::NegProp(name(*rel)),
        }
    }

    pub fn describe(&self, a: &Structure, b: &Structure, pairs: &[(Elem, Elem)]) -> String {
        let tuple = |s: &Structure, idx: &[usize], side: Side| {
            let names: Vec<&str> = idx
                .iter()
                .map(|&i| {
                    let e = if side == Side::A {
                        pairs[i].0
                    } else {
                        pairs[i].1
                    };
                    s.elem_name(e)
                })
                .collect();
            names.join(",")
        };
        let rel = |r: usize| a.vocab().name(r);
        match self {
            Violation::Functionality { .. } => "functionality violated".into(),
            Violation::Injectivity { .. } => "injectivity violated".into(),
            Violation::NotPreserved { rel: r, idx } => format!(
                "{}({}) in A but not {}({}) in B",
                rel(*r),
                tuple(a, idx, Side::A),
                rel(*r),
                tuple(b, idx, Side::B)
            ),
            Violation::NotReflected { rel: r, idx } => format!(
                "{}({}) in B but not {}({}) in A",
                rel(*r),
                tuple(b, idx, Side::B),
                rel(*r),
                tuple(a, idx, Side::A)
            ),
            Violation::PropNotPreserved { rel: r } => {
                format!("{} holds in A but not in B", rel(*r))
            }
            Violation::PropNotReflected { rel: r } => {
                format!("{} holds in B but not in A", rel(*r))
            }
        }
    }
}

fn index_tuples(m: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (0..arity)
        .try_fold(1usize, |acc, _| acc.checked_mul(m))
        .unwrap_or(0);
    (0..total).map(move |mut code| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = code % m;
            code /= m;
        }
        t
    })
}

/// Checks whether `pairs` is a partial isomorphism (iso modes) or a partial
/// homomorphism (other modes) from `A` to `B`. With `focus`, only
/// constraints involving that pair index are checked.
pub fn check_pairs(
    a: &Structure,
    b: &Structure,
    pairs: &[(Elem, Elem)],
    mode: Mode,
    focus: Option<usize>,
) -> Option<Violation> {
    let iso = mode.iso_condition();
    let relevant = |i: usize, j: usize| focus.is_none_or(|f| i == f || j == f);
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if relevant(i, j) && pairs[i].0 == pairs[j].0 && pairs[i].1 != pairs[j].1 {
                return Some(Violation::Functionality { i, j });
            }
        }
    }
    if iso {
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                if relevant(i, j) && pairs[i].0 != pairs[j].0 && pairs[i].1 == pairs[j].1 {
                    return Some(Violation::Injectivity { i, j });
                }
            }
        }
    }
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    for r in 0..a.vocab().len() {
        for idx in index_tuples(pairs.len(), a.vocab().arity(r)) {
            if let Some(f) = focus {
                if !idx.contains(&f) {
                    continue;
                }
            }
            ta.clear();
            tb.clear();
            ta.extend(idx.iter().map(|&i| pairs[i].0));
            tb.extend(idx.iter().map(|&i| pairs[i].1));
            let (in_a, in_b) = (a.holds(r, &ta), b.holds(r, &tb));
            if in_a && !in_b {
                return Some(Violation::NotPreserved { rel: r, idx });
            }
            if iso && !in_a && in_b {
                return Some(Violation::NotReflected { rel: r, idx });
            }
        }
    }
    None
}

/// The modal condition on a pair of worlds: propositions agree (iso modes)
/// or are preserved from `A` to `B`.
pub fn check_worlds(
    a: &Structure,
    b: &Structure,
    wa: Elem,
    wb: Elem,
    mode: Mode,
) -> Option<Violation> {
    for r in a.vocab().of_arity(1) {
        let (in_a, in_b) = (a.holds(r, &[wa]), b.holds(r, &[wb]));
        if in_a && !in_b {
            return Some(Violation::PropNotPreserved { rel: r });
        }
        if mode.iso_condition() && !in_a && in_b {
            return Some(Violation::PropNotReflected { rel: r });
        }
    }
    None
}
