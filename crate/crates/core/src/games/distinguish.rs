//! Distinguishing formulas read off Spoiler's winning strategy.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::games::solver::{solve, NodeId, Position, Verdict};
use crate::games::spec::{check_pairs, check_worlds, GameFamily, GameSpec, Side};
use crate::logic::eval::{holds, standard_translation};
use crate::logic::formula::{Formula, Var};
use crate::structure::{Elem, Structure};

/// A sentence of the game's fragment true in `A` and false in `B`.
pub fn distinguish(spec: GameSpec, a: &Structure, b: &Structure) -> Result<Formula> {
    let verdict = solve(spec, a, b)?;
    distinguish_from(&verdict, a, b)
}

/// Same as [`distinguish`], reusing a solved game.
pub fn distinguish_from(verdict: &Verdict, a: &Structure, b: &Structure) -> Result<Formula> {
    if verdict.duplicator_wins {
        return Err(Error::DuplicatorWins);
    }
    let root = verdict.root();
    let f = match verdict.spec.family {
        GameFamily::Ef => ef(verdict, a, b, &mut Vec::new(), root),
        GameFamily::Pebble => pebble(verdict, a, b, root, &mut HashMap::new()),
        GameFamily::Modal => modal(verdict, a, b, root),
    };
    verify(verdict, &f, a, b)?;
    Ok(f)
}

fn quantify(side: Side, var: Var, parts: Vec<Formula>) -> Formula {
    match side {
        Side::A => Formula::exists(var, Formula::and(parts)),
        Side::B => Formula::forall(var, Formula::or(parts)),
    }
}

fn pair(side: Side, mine: Elem, theirs: Elem) -> (Elem, Elem) {
    match side {
        Side::A => (mine, theirs),
        Side::B => (theirs, mine),
    }
}

fn ef(
    v: &Verdict,
    a: &Structure,
    b: &Structure,
    seq: &mut Vec<(Elem, Elem)>,
    node: NodeId,
) -> Formula {
    if !v.condition_holds(node) {
        let violation = check_pairs(a, b, seq, v.spec.mode, None)
            .expect("dead position violates the condition");
        return violation.literal(a, |i| i as Var + 1);
    }
    let mv = v.spoiler_move(node).expect("Spoiler wins here");
    let var = seq.len() as Var + 1;
    let mut parts = Vec::new();
    for &(y, child) in v.answers(node, &mv).expect("own move") {
        seq.push(pair(mv.side, mv.elem, y));
        parts.push(ef(v, a, b, seq, child));
        seq.pop();
    }
    quantify(mv.side, var, parts)
}

fn pebble(
    v: &Verdict,
    a: &Structure,
    b: &Structure,
    node: NodeId,
    memo: &mut HashMap<NodeId, Formula>,
) -> Formula {
    if let Some(f) = memo.get(&node) {
        return f.clone();
    }
    let f = if !v.condition_holds(node) {
        let Position::Pebble { placement, .. } = v.position(node) else {
            unreachable!("pebble game")
        };
        let placed: Vec<usize> = (0..placement.len())
            .filter(|&p| placement[p].is_some())
            .collect();
        let pairs: Vec<(Elem, Elem)> = placement.iter().flatten().copied().collect();
        let violation = check_pairs(a, b, &pairs, v.spec.mode, None)
            .expect("dead position violates the condition");
        violation.literal(a, |i| placed[i] as Var + 1)
    } else {
        let mv = v.spoiler_move(node).expect("Spoiler wins here");
        let var = mv.pebble.expect("pebble move") as Var + 1;
        let parts = v
            .answers(node, &mv)
            .expect("own move")
            .iter()
            .map(|&(_, child)| pebble(v, a, b, child, memo))
            .collect();
        quantify(mv.side, var, parts)
    };
    memo.insert(node, f.clone());
    f
}

fn modal(v: &Verdict, a: &Structure, b: &Structure, node: NodeId) -> Formula {
    let &Position::Modal { a: wa, b: wb, .. } = v.position(node) else {
        unreachable!("modal game")
    };
    if !v.condition_holds(node) {
        let violation =
            check_worlds(a, b, wa, wb, v.spec.mode).expect("dead position violates the condition");
        return violation.literal(a, |_| 1);
    }
    let mv = v.spoiler_move(node).expect("Spoiler wins here");
    let rel = a.vocab().name(mv.relation.expect("modal move"));
    let parts: Vec<Formula> = v
        .answers(node, &mv)
        .expect("own move")
        .iter()
        .map(|&(_, child)| modal(v, a, b, child))
        .collect();
    match mv.side {
        Side::A => Formula::possibly(rel, Formula::and(parts)),
        Side::B => Formula::necessarily(rel, Formula::or(parts)),
    }
}

/// Checks that `f` separates `A` from `B` inside the game's fragment and
/// resource bound.
pub fn verify_distinguisher(
    spec: GameSpec,
    f: &Formula,
    a: &Structure,
    b: &Structure,
    stage: Option<usize>,
) -> Result<()> {
    let c = f.classify();
    let fail = |why: &str| Err(Error::Internal(format!("distinguishing formula {f} {why}")));
    if !c.in_mode(spec.mode) {
        return fail("is outside the mode");
    }
    match spec.family {
        GameFamily::Ef if c.rank > spec.k => return fail("exceeds the quantifier rank"),
        GameFamily::Pebble if c.var_count > spec.k => return fail("uses too many variables"),
        GameFamily::Pebble if stage.is_some_and(|s| c.rank > s) => {
            return fail("exceeds the death stage")
        }
        GameFamily::Modal if c.modal_depth.is_none_or(|d| d > spec.k) => {
            return fail("exceeds the modal depth")
        }
        _ => {}
    }
    if spec.family != GameFamily::Modal && !f.free_vars().is_empty() {
        return fail("has free variables");
    }
    if !holds(f, a)? {
        return fail("is false in A");
    }
    if holds(f, b)? {
        return fail("is true in B");
    }
    if spec.family == GameFamily::Modal {
        // cross-check through the first-order reading
        let tr = standard_translation(f, 1)?;
        let at = |s: &Structure| {
            crate::logic::eval::model_check(
                &tr,
                s,
                &crate::logic::eval::Assignment::new().bind(1, s.point().expect("pointed")),
            )
        };
        if !at(a)? || at(b)? {
            return fail("disagrees with its standard translation");
        }
    }
    Ok(())
}

fn verify(v: &Verdict, f: &Formula, a: &Structure, b: &Structure) -> Result<()> {
    verify_distinguisher(v.spec, f, a, b, v.stage(v.root()))
}
