//! Back-and-forth systems between forest coalgebras: the arboreal games.
//!
//! A pair `(x, y)` of equal depth is winning when the chain map `↓x → ↓y`
//! (matching elements by depth) is a homomorphism of the induced
//! substructures, or an isomorphism for the iso-condition modes. `None`
//! stands for the empty path `⊥`.

use std::collections::BTreeSet;

use crate::coalgebra::{local_ok, require_compatible, ForestCoalgebra};
use crate::error::Result;
use crate::logic::Mode;
use crate::structure::Elem;

pub type PathPair = (Option<Elem>, Option<Elem>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackForthSystem {
    pub pairs: BTreeSet<PathPair>,
    /// Closed under taking both predecessors.
    pub strong: bool,
}

struct Solver<'a> {
    x: &'a ForestCoalgebra,
    y: &'a ForestCoalgebra,
    iso: bool,
    back: bool,
    memo: Vec<Option<bool>>,
}

impl Solver<'_> {
    fn kids(c: &ForestCoalgebra, node: Option<Elem>) -> &[Elem] {
        match node {
            None => c.roots(),
            Some(e) => c.children(e),
        }
    }

    /// Whether Duplicator survives from `(a, b)`, assuming the pair above
    /// it satisfies the condition.
    fn alive(&mut self, a: Option<Elem>, b: Option<Elem>) -> bool {
        let key = match (a, b) {
            (Some(a), Some(b)) => a * self.y.len() + b,
            _ => self.x.len() * self.y.len(),
        };
        if let Some(v) = self.memo[key] {
            return v;
        }
        let (x, y) = (self.x, self.y);
        let ok = match (a, b) {
            (Some(a), Some(b)) => local_ok(x, a, y, b, self.iso),
            _ => true,
        } && Self::kids(x, a).iter().all(|&c| {
            Self::kids(y, b)
                .iter()
                .any(|&d| self.alive(Some(c), Some(d)))
        }) && (!self.back
            || Self::kids(y, b).iter().all(|&d| {
                Self::kids(x, a)
                    .iter()
                    .any(|&c| self.alive(Some(c), Some(d)))
            }));
        self.memo[key] = Some(ok);
        ok
    }
}

fn has_back(mode: Mode) -> bool {
    mode.spoiler_plays_both()
}

/// The largest winning system reachable from `(⊥, ⊥)`, or `None` when
/// Spoiler wins the arboreal game of `mode`.
pub fn back_forth(
    mode: Mode,
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
) -> Result<Option<BackForthSystem>> {
    require_compatible(x, y)?;
    x.require_valid("left coalgebra")?;
    y.require_valid("right coalgebra")?;
    Ok(back_forth_unchecked(mode, x, y))
}

pub(crate) fn back_forth_unchecked(
    mode: Mode,
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
) -> Option<BackForthSystem> {
    let mut s = Solver {
        x,
        y,
        iso: mode.iso_condition(),
        back: has_back(mode),
        memo: vec![None; x.len() * y.len() + 1],
    };
    if !s.alive(None, None) {
        return None;
    }
    let mut pairs = BTreeSet::new();
    let mut stack = vec![(None, None)];
    while let Some((a, b)) = stack.pop() {
        if !pairs.insert((a, b)) {
            continue;
        }
        for &c in Solver::kids(x, a) {
            for &d in Solver::kids(y, b) {
                if s.alive(Some(c), Some(d)) {
                    stack.push((Some(c), Some(d)));
                }
            }
        }
    }
    Some(BackForthSystem {
        pairs,
        strong: true,
    })
}

/// Every way `system` fails to be a back-and-forth system for `mode`.
pub fn check_back_forth(
    mode: Mode,
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
    system: &BackForthSystem,
) -> Vec<String> {
    let mut out = Vec::new();
    let name = |c: &ForestCoalgebra, e: Option<Elem>| {
        e.map_or("⊥".to_string(), |e| c.carrier().elem_name(e).to_string())
    };
    let show = |&(a, b): &PathPair| format!("({},{})", name(x, a), name(y, b));
    if !system.pairs.contains(&(None, None)) {
        out.push("root pair (⊥,⊥) missing".to_string());
    }
    for pair in &system.pairs {
        let (a, b) = *pair;
        match (a, b) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                let (ca, cb) = (x.chain(a), y.chain(b));
                let ok = ca.len() == cb.len()
                    && ca
                        .iter()
                        .zip(cb)
                        .all(|(&u, &v)| local_ok(x, u, y, v, mode.iso_condition()));
                if !ok {
                    out.push(format!("{} fails the winning condition", show(pair)));
                }
            }
            _ => out.push(format!("{} pairs a path with the empty path", show(pair))),
        }
        let kids_x: &[Elem] = a.map_or(x.roots(), |a| x.children(a));
        let kids_y: &[Elem] = b.map_or(y.roots(), |b| y.children(b));
        for &c in kids_x {
            if !kids_y
                .iter()
                .any(|&d| system.pairs.contains(&(Some(c), Some(d))))
            {
                out.push(format!(
                    "forth fails at {} for {}",
                    show(pair),
                    name(x, Some(c))
                ));
            }
        }
        if has_back(mode) {
            for &d in kids_y {
                if !kids_x
                    .iter()
                    .any(|&c| system.pairs.contains(&(Some(c), Some(d))))
                {
                    out.push(format!(
                        "back fails at {} for {}",
                        show(pair),
                        name(y, Some(d))
                    ));
                }
            }
        }
        if system.strong {
            if let (Some(a), Some(b)) = (a, b) {
                if !system.pairs.contains(&(x.parent(a), y.parent(b))) {
                    out.push(format!("{} has no predecessor pair", show(pair)));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::{build_ef, DEFAULT_CARRIER_CAP};
    use crate::io::parse_structure;

    fn fi(src: &str, k: usize) -> ForestCoalgebra {
        build_ef(&parse_structure(src).unwrap(), k, true, DEFAULT_CARRIER_CAP)
            .unwrap()
            .into_coalgebra()
    }

    #[test]
    fn point_into_loop() {
        let bare = fi("vocab E/2\nstructure P\nelems p", 1);
        let lp = fi("vocab E/2\nstructure Q\nelems q\nrel E q q", 1);
        let sys = back_forth(Mode::Positive, &bare, &lp).unwrap().unwrap();
        assert_eq!(
            sys.pairs,
            BTreeSet::from([(None, None), (Some(0), Some(0))])
        );
        assert!(check_back_forth(Mode::Positive, &bare, &lp, &sys).is_empty());
        assert!(back_forth(Mode::Positive, &lp, &bare).unwrap().is_none());
    }

    #[test]
    fn diagonal_on_equal_inputs() {
        let x = fi("vocab E/2\nstructure D\nelems v w\nrel E v w", 2);
        let sys = back_forth(Mode::Full, &x, &x).unwrap().unwrap();
        assert!((0..x.len()).all(|e| sys.pairs.contains(&(Some(e), Some(e)))));
        assert!(check_back_forth(Mode::Full, &x, &x, &sys).is_empty());
    }
}
