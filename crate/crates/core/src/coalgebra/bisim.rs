//! Bisimulations and positive bisimulations between cofree coalgebras,
//! assembled from Duplicator's winning strategy.
//!
//! The plays consistent with the strategy form a forest `W`. Pulling the
//! relations of `F A` back along the first projection gives `Z1`, pulling
//! those of `F B` back along the second gives `Z2`; the identity of `W` is
//! then a bijective morphism `Z1 → Z2` and the projections are open
//! pathwise embeddings.

use std::collections::{BTreeSet, HashMap};

use crate::coalgebra::build::{build_ef, build_modal, Cofree, Step, DEFAULT_CARRIER_CAP};
use crate::coalgebra::morphism::{
    check_morphism, open_violation, pullback, MorphismKind, MorphismTag,
};
use crate::coalgebra::{ForestCoalgebra, ForestKind};
use crate::error::{Error, Result};
use crate::games::backforth::{BackForthSystem, PathPair};
use crate::games::{solve, GameFamily, GameSpec, NodeId, Side, Verdict};
use crate::logic::Mode;
use crate::structure::{Elem, Structure, Vocabulary};

#[derive(Debug, Clone)]
pub struct PositiveBisimWitness {
    pub z1: ForestCoalgebra,
    pub z2: ForestCoalgebra,
    pub h: Vec<Elem>,
    pub p: Vec<Elem>,
    pub q: Vec<Elem>,
}

/// `X ← Z → Y`.
#[derive(Debug, Clone)]
pub struct Span {
    pub z: ForestCoalgebra,
    pub p: Vec<Elem>,
    pub q: Vec<Elem>,
}

#[derive(Debug, Clone)]
pub struct PositiveBisimOutcome {
    pub x: ForestCoalgebra,
    pub y: ForestCoalgebra,
    pub witness: PositiveBisimWitness,
}

#[derive(Debug, Clone)]
pub struct BisimOutcome {
    pub x: ForestCoalgebra,
    pub y: ForestCoalgebra,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisimCheck {
    pub ok: bool,
    pub reasons: Vec<String>,
}

impl BisimCheck {
    fn from(reasons: Vec<String>) -> Self {
        BisimCheck {
            ok: reasons.is_empty(),
            reasons,
        }
    }
}

fn cofree(family: GameFamily, s: &Structure, k: usize) -> Result<Cofree> {
    match family {
        GameFamily::Ef => build_ef(s, k, true, DEFAULT_CARRIER_CAP),
        GameFamily::Modal => build_modal(s, k, DEFAULT_CARRIER_CAP),
        GameFamily::Pebble => Err(Error::Precondition(
            "bisimulations are built for the EF (with I) and modal families".into(),
        )),
    }
}

fn spec_for(family: GameFamily, mode: Mode, k: usize) -> GameSpec {
    match family {
        GameFamily::Modal => GameSpec::modal(mode, k),
        _ => GameSpec::ef(mode, k),
    }
}

/// The forest of plays under Duplicator's strategy, with both projections.
struct Plays {
    parent: Vec<Option<Elem>>,
    p: Vec<Elem>,
    q: Vec<Elem>,
}

fn plays(verdict: &Verdict, fx: &Cofree, fy: &Cofree) -> Result<Plays> {
    let modal = verdict.spec.family == GameFamily::Modal;
    let mut w = Plays {
        parent: Vec::new(),
        p: Vec::new(),
        q: Vec::new(),
    };
    let mut index: HashMap<(Elem, Elem), Elem> = HashMap::new();
    // (game node, play in W, or None for the empty play)
    let mut stack: Vec<(NodeId, Option<Elem>)> = Vec::new();
    if modal {
        w.parent.push(None);
        w.p.push(0);
        w.q.push(0);
        index.insert((0, 0), 0);
        stack.push((verdict.root(), Some(0)));
    } else {
        stack.push((verdict.root(), None));
    }
    let seq = |c: &Cofree, at: Option<Elem>| at.map_or(Vec::new(), |e| c.seq(e).to_vec());
    while let Some((node, at)) = stack.pop() {
        for mv in verdict.moves(node).copied().collect::<Vec<_>>() {
            let (answer, child) = verdict.duplicator_answer(node, &mv).ok_or_else(|| {
                Error::Internal("Duplicator's strategy has no answer in a won position".into())
            })?;
            let (ea, eb) = if mv.side == Side::A {
                (mv.elem, answer)
            } else {
                (answer, mv.elem)
            };
            let label = mv.relation.map_or(0, |r| r + 1);
            let mut s = seq(fx, at.map(|i| w.p[i]));
            let mut t = seq(fy, at.map(|i| w.q[i]));
            s.push(Step { label, elem: ea });
            t.push(Step { label, elem: eb });
            let (Some(px), Some(qy)) = (fx.lookup(&s), fy.lookup(&t)) else {
                return Err(Error::Internal("play outside the cofree coalgebra".into()));
            };
            if index.contains_key(&(px, qy)) {
                continue;
            }
            let id = w.parent.len();
            index.insert((px, qy), id);
            w.parent.push(at);
            w.p.push(px);
            w.q.push(qy);
            stack.push((child, Some(id)));
        }
    }
    Ok(w)
}

/// `W` with no relations, parents before children, together with the two
/// projections in that order.
fn bare_forest(
    w: &Plays,
    fx: &Cofree,
    fy: &Cofree,
    name: &str,
) -> Result<(ForestCoalgebra, Vec<Elem>, Vec<Elem>)> {
    let (xs, ys) = (fx.coalgebra().carrier(), fy.coalgebra().carrier());
    let mut depth = vec![0usize; w.parent.len()];
    for e in 0..w.parent.len() {
        // plays are pushed after their parents
        depth[e] = w.parent[e].map_or(0, |p| depth[p] + 1);
    }
    let mut order: Vec<Elem> = (0..w.parent.len()).collect();
    order.sort_by_key(|&e| (depth[e], w.p[e], w.q[e]));
    let mut rank = vec![0; order.len()];
    for (i, &e) in order.iter().enumerate() {
        rank[e] = i;
    }
    let names: Vec<String> = order
        .iter()
        .map(|&e| format!("<{}|{}>", xs.elem_name(w.p[e]), ys.elem_name(w.q[e])))
        .collect();
    let vocab: Vocabulary = xs.vocab().clone();
    let empty = vec![Vec::new(); vocab.len()];
    let modal = fx.coalgebra().kind() == ForestKind::Modal;
    let carrier = Structure::new(name, vocab, names, empty, modal.then_some(0))?;
    let parent = order
        .iter()
        .map(|&e| w.parent[e].map(|p| rank[p]))
        .collect();
    let bare = ForestCoalgebra::new(
        fx.coalgebra().kind(),
        carrier,
        parent,
        None,
        fx.coalgebra().k(),
    )?;
    let p = order.iter().map(|&e| w.p[e]).collect();
    let q = order.iter().map(|&e| w.q[e]).collect();
    Ok((bare, p, q))
}

/// `(Z1, Z2, p, q)`: the two pulled-back forests over one set of plays.
type Assembled = (ForestCoalgebra, ForestCoalgebra, Vec<Elem>, Vec<Elem>);

fn assemble(
    verdict: &Verdict,
    mode: Mode,
    fx: &Cofree,
    fy: &Cofree,
) -> Result<Option<Assembled>> {
    if verdict.spec.mode != mode || verdict.spec.family == GameFamily::Pebble {
        return Err(Error::Precondition(format!(
            "expected a solved {mode} EF or modal game, got {}",
            verdict.spec
        )));
    }
    if fx.coalgebra().k() != verdict.spec.k || fy.coalgebra().k() != verdict.spec.k {
        return Err(Error::Precondition(
            "coalgebras and game disagree on the bound".into(),
        ));
    }
    if !verdict.duplicator_wins {
        return Ok(None);
    }
    let w = plays(verdict, fx, fy)?;
    let name = format!("W({},{})", fx.base().name(), fy.base().name());
    let (bare, p, q) = bare_forest(&w, fx, fy, &name)?;
    let z1 = pullback(&bare, fx.coalgebra(), &p)?;
    let z2 = pullback(&bare, fy.coalgebra(), &q)?;
    Ok(Some((z1, z2, p, q)))
}

/// The positive bisimulation read off a solved positive game whose inputs
/// the cofree coalgebras `fx`, `fy` were built from (EF with `I`, or modal).
pub fn positive_bisim_from(
    verdict: &Verdict,
    fx: &Cofree,
    fy: &Cofree,
) -> Result<Option<PositiveBisimWitness>> {
    let Some((z1, z2, p, q)) = assemble(verdict, Mode::Positive, fx, fy)? else {
        return Ok(None);
    };
    let h = (0..z1.len()).collect();
    let witness = PositiveBisimWitness { z1, z2, h, p, q };
    let check = verify_positive_bisim(&witness, fx.coalgebra(), fy.coalgebra());
    if !check.ok {
        return Err(Error::Internal(format!(
            "positive bisimulation rejected: {}",
            check.reasons.join("; ")
        )));
    }
    Ok(Some(witness))
}

/// The span of open pathwise embeddings read off a solved full game.
pub fn bisim_from(verdict: &Verdict, fx: &Cofree, fy: &Cofree) -> Result<Option<Span>> {
    let Some((z1, z2, p, q)) = assemble(verdict, Mode::Full, fx, fy)? else {
        return Ok(None);
    };
    if z1 != z2 {
        return Err(Error::Internal(
            "the two pullbacks of a full-game play forest differ".into(),
        ));
    }
    let span = Span { z: z1, p, q };
    let check = verify_bisim(&span, fx.coalgebra(), fy.coalgebra());
    if !check.ok {
        return Err(Error::Internal(format!(
            "bisimulation rejected: {}",
            check.reasons.join("; ")
        )));
    }
    Ok(Some(span))
}

/// A positive bisimulation from `F A` to `F B` built from the positive
/// game, or `None` when Spoiler wins it.
pub fn build_positive_bisim(
    family: GameFamily,
    a: &Structure,
    b: &Structure,
    k: usize,
) -> Result<Option<PositiveBisimOutcome>> {
    let (fx, fy) = (cofree(family, a, k)?, cofree(family, b, k)?);
    let verdict = solve(spec_for(family, Mode::Positive, k), a, b)?;
    let Some(witness) = positive_bisim_from(&verdict, &fx, &fy)? else {
        return Ok(None);
    };
    Ok(Some(PositiveBisimOutcome {
        x: fx.into_coalgebra(),
        y: fy.into_coalgebra(),
        witness,
    }))
}

/// A span of open pathwise embeddings between `F A` and `F B` built from
/// the full game, or `None` when Spoiler wins it.
pub fn build_bisim(
    family: GameFamily,
    a: &Structure,
    b: &Structure,
    k: usize,
) -> Result<Option<BisimOutcome>> {
    let (fx, fy) = (cofree(family, a, k)?, cofree(family, b, k)?);
    let verdict = solve(spec_for(family, Mode::Full, k), a, b)?;
    let Some(span) = bisim_from(&verdict, &fx, &fy)? else {
        return Ok(None);
    };
    Ok(Some(BisimOutcome {
        x: fx.into_coalgebra(),
        y: fy.into_coalgebra(),
        span,
    }))
}

fn leg_reasons(
    label: &str,
    z: &ForestCoalgebra,
    x: &ForestCoalgebra,
    f: &[Elem],
    out: &mut Vec<String>,
) {
    match check_morphism(z, x, f) {
        Err(e) => out.push(format!("{label}: {e}")),
        Ok(w) => {
            if !w.is(MorphismKind::Hom)
                || (z.kind() == ForestKind::Pebble && !w.has(MorphismTag::PebblePreserving))
            {
                out.push(format!("{label} is not a coalgebra morphism"));
            } else if !w.has(MorphismTag::PathwiseEmbedding) {
                out.push(format!("{label} is not a pathwise embedding"));
            } else if !w.has(MorphismTag::Open) {
                let at = open_violation(z, x, f).unwrap_or_default();
                out.push(format!("{label}: {at}"));
            }
        }
    }
}

fn validity(label: &str, z: &ForestCoalgebra, out: &mut Vec<String>) {
    for v in z.validate() {
        out.push(format!("{label} invalid: {v}"));
    }
}

pub fn verify_positive_bisim(
    w: &PositiveBisimWitness,
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
) -> BisimCheck {
    let mut out = Vec::new();
    validity("Z1", &w.z1, &mut out);
    validity("Z2", &w.z2, &mut out);
    match check_morphism(&w.z1, &w.z2, &w.h) {
        Err(e) => out.push(format!("h: {e}")),
        Ok(hw) => {
            if !hw.is(MorphismKind::Hom) {
                out.push("h is not a coalgebra morphism".into());
            }
            if !hw.has(MorphismTag::Bijection) {
                out.push("h not bijective".into());
            }
        }
    }
    leg_reasons("p", &w.z1, x, &w.p, &mut out);
    leg_reasons("q", &w.z2, y, &w.q, &mut out);
    BisimCheck::from(out)
}

pub fn verify_bisim(span: &Span, x: &ForestCoalgebra, y: &ForestCoalgebra) -> BisimCheck {
    let mut out = Vec::new();
    validity("Z", &span.z, &mut out);
    leg_reasons("p", &span.z, x, &span.p, &mut out);
    leg_reasons("q", &span.z, y, &span.q, &mut out);
    BisimCheck::from(out)
}

fn system_of(
    pairs: impl Iterator<Item = (Elem, Elem)>,
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
) -> BackForthSystem {
    let mut set: BTreeSet<PathPair> = BTreeSet::from([(None, None)]);
    set.extend(pairs.map(|(a, b)| (Some(a), Some(b))));
    let strong = set.iter().all(|&(a, b)| match (a, b) {
        (Some(a), Some(b)) => set.contains(&(x.parent(a), y.parent(b))),
        _ => true,
    });
    BackForthSystem { pairs: set, strong }
}

/// The pairs `(p(m), q(h(m)))` of a positive bisimulation, with `(⊥, ⊥)`.
pub fn system_from_witness(
    w: &PositiveBisimWitness,
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
) -> BackForthSystem {
    system_of((0..w.z1.len()).map(|m| (w.p[m], w.q[w.h[m]])), x, y)
}

pub fn system_from_span(span: &Span, x: &ForestCoalgebra, y: &ForestCoalgebra) -> BackForthSystem {
    system_of((0..span.z.len()).map(|m| (span.p[m], span.q[m])), x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::backforth::check_back_forth;
    use crate::io::parse_structure;

    const POINT: &str = "vocab E/2\nstructure P\nelems p";
    const LOOP: &str = "vocab E/2\nstructure Q\nelems q\nrel E q q";

    #[test]
    fn point_into_loop() {
        let (a, b) = (
            parse_structure(POINT).unwrap(),
            parse_structure(LOOP).unwrap(),
        );
        let out = build_positive_bisim(GameFamily::Ef, &a, &b, 2)
            .unwrap()
            .unwrap();
        let w = &out.witness;
        let hw = check_morphism(&w.z1, &w.z2, &w.h).unwrap();
        assert!(hw.has(MorphismTag::Bijection) && !hw.has(MorphismTag::PathwiseEmbedding));
        assert!(w.z2.carrier().tuple_count() > w.z1.carrier().tuple_count());
        let sys = system_from_witness(w, &out.x, &out.y);
        assert!(sys.strong);
        assert!(check_back_forth(Mode::Positive, &out.x, &out.y, &sys).is_empty());
        assert!(build_positive_bisim(GameFamily::Ef, &b, &a, 2)
            .unwrap()
            .is_none());
    }

    #[test]
    fn equal_inputs() {
        let a = parse_structure("vocab E/2\nstructure D\nelems v w\nrel E v w").unwrap();
        let out = build_positive_bisim(GameFamily::Ef, &a, &a, 2)
            .unwrap()
            .unwrap();
        assert_eq!(out.witness.z1, out.witness.z2);
        assert!(out
            .witness
            .p
            .iter()
            .zip(&out.witness.q)
            .all(|(p, q)| p == q));
        let full = build_bisim(GameFamily::Ef, &a, &a, 2).unwrap().unwrap();
        assert!(verify_bisim(&full.span, &full.x, &full.y).ok);
    }

    #[test]
    fn verifier_catches_broken_witnesses() {
        let (a, b) = (
            parse_structure(POINT).unwrap(),
            parse_structure(LOOP).unwrap(),
        );
        let out = build_positive_bisim(GameFamily::Ef, &a, &b, 2)
            .unwrap()
            .unwrap();
        let mut w = out.witness.clone();
        w.h = vec![0; w.z1.len()];
        let check = verify_positive_bisim(&w, &out.x, &out.y);
        assert!(check.reasons.iter().any(|r| r == "h not bijective"));

        let m =
            parse_structure("vocab R/2\nstructure M\nelems a b c\nrel R a b\nrel R a c\npoint a")
                .unwrap();
        let full = build_bisim(GameFamily::Modal, &m, &m, 1).unwrap().unwrap();
        // drop every play whose left projection is one successor of the root
        let z = &full.span.z;
        let gone = full.span.p[z.children(0)[0]];
        let keep: Vec<Elem> = (0..z.len()).filter(|&e| full.span.p[e] != gone).collect();
        let sub = restrict(z, &keep);
        let span = Span {
            z: sub,
            p: keep.iter().map(|&e| full.span.p[e]).collect(),
            q: keep.iter().map(|&e| full.span.q[e]).collect(),
        };
        let check = verify_bisim(&span, &full.x, &full.y);
        assert!(
            check.reasons.iter().any(|r| r.contains("open violated at")),
            "{:?}",
            check.reasons
        );
    }

    fn restrict(z: &ForestCoalgebra, keep: &[Elem]) -> ForestCoalgebra {
        let pos = |e: Elem| keep.iter().position(|&k| k == e);
        let c = z.carrier();
        let names = keep.iter().map(|&e| c.elem_name(e).to_string()).collect();
        let tuples = (0..c.vocab().len())
            .map(|r| {
                c.relation(r)
                    .tuples()
                    .iter()
                    .filter_map(|t| t.iter().map(|&e| pos(e)).collect::<Option<Vec<_>>>())
                    .collect()
            })
            .collect();
        let carrier = Structure::new(
            c.name(),
            c.vocab().clone(),
            names,
            tuples,
            c.point().and_then(pos),
        )
        .unwrap();
        let parent = keep.iter().map(|&e| z.parent(e).and_then(pos)).collect();
        ForestCoalgebra::new(z.kind(), carrier, parent, None, z.k()).unwrap()
    }
}
