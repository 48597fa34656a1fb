//! Cofree coalgebras: the comonads applied to a structure, with counit and
//! coextension.

use std::collections::HashMap;

use crate::coalgebra::morphism::is_coalgebra_morphism;
use crate::coalgebra::{ForestCoalgebra, ForestKind};
use crate::error::{Error, Result};
use crate::structure::{expand_equality, is_homomorphism, Elem, Structure};

pub const DEFAULT_CARRIER_CAP: usize = 100_000;

/// One move of a play. `label` is 0 for EF moves and for the root of a
/// modal path, the 1-based pebble index for pebble moves, and the relation
/// index plus one for a modal step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub label: usize,
    pub elem: Elem,
}

/// A comonad applied to a structure: the coalgebra together with the
/// sequence behind each of its elements.
#[derive(Debug, Clone)]
pub struct Cofree {
    coalgebra: ForestCoalgebra,
    base: Structure,
    seqs: Vec<Vec<Step>>,
    index: HashMap<Vec<Step>, Elem>,
}

impl Cofree {
    pub fn coalgebra(&self) -> &ForestCoalgebra {
        &self.coalgebra
    }

    pub fn into_coalgebra(self) -> ForestCoalgebra {
        self.coalgebra
    }

    /// The structure the comonad was applied to (with `I` when requested).
    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn seq(&self, x: Elem) -> &[Step] {
        &self.seqs[x]
    }

    pub fn lookup(&self, seq: &[Step]) -> Option<Elem> {
        self.index.get(seq).copied()
    }

    /// Last element of the sequence (endpoint of the path).
    pub fn counit(&self, x: Elem) -> Elem {
        self.seqs[x].last().expect("sequences are non-empty").elem
    }

    pub fn counit_map(&self) -> Vec<Elem> {
        (0..self.seqs.len()).map(|x| self.counit(x)).collect()
    }
}

fn overflow(cap: usize) -> Error {
    Error::ResourceLimit(format!("coalgebra would exceed {cap} elements"))
}

fn count_sequences(branching: usize, depth: usize, cap: usize) -> Result<usize> {
    let mut total = 0usize;
    let mut level = 1usize;
    for _ in 0..depth {
        level = level.checked_mul(branching).ok_or_else(|| overflow(cap))?;
        total = total.checked_add(level).ok_or_else(|| overflow(cap))?;
        if total > cap {
            return Err(overflow(cap));
        }
    }
    Ok(total)
}

fn seq_name(base: &Structure, seq: &[Step], kind: ForestKind) -> String {
    match kind {
        ForestKind::Ef => {
            let parts: Vec<&str> = seq.iter().map(|s| base.elem_name(s.elem)).collect();
            format!("[{}]", parts.join(","))
        }
        ForestKind::Pebble => {
            let parts: Vec<String> = seq
                .iter()
                .map(|s| format!("{}:{}", s.label, base.elem_name(s.elem)))
                .collect();
            format!("[{}]", parts.join(","))
        }
        ForestKind::Modal => {
            let mut name = base.elem_name(seq[0].elem).to_string();
            for s in &seq[1..] {
                name.push_str(&format!(
                    "-{}->{}",
                    base.vocab().name(s.label - 1),
                    base.elem_name(s.elem)
                ));
            }
            name
        }
    }
}

/// Sequences level by level; each level extends the previous one in order.
fn enumerate(
    first: Vec<Vec<Step>>,
    depth: usize,
    mut extend: impl FnMut(&[Step]) -> Vec<Step>,
) -> Vec<Vec<Step>> {
    let mut all = Vec::new();
    let mut level = first;
    for d in 1..=depth {
        let mut next = Vec::new();
        if d < depth {
            for s in &level {
                for step in extend(s) {
                    let mut t = s.clone();
                    t.push(step);
                    next.push(t);
                }
            }
        }
        all.append(&mut level);
        level = next;
    }
    all
}

/// Tuples over the chain `chain` (root first) that use its last element,
/// filtered by `keep` on chain positions.
fn chain_tuples(
    chain_len: usize,
    arity: usize,
    mut keep: impl FnMut(&[usize]) -> bool,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; arity];
    let total = chain_len.pow(arity as u32);
    for mut code in 0..total {
        for slot in cur.iter_mut().rev() {
            *slot = code % chain_len;
            code /= chain_len;
        }
        if cur.contains(&(chain_len - 1)) && keep(&cur) {
            out.push(cur.clone());
        }
    }
    out
}

fn assemble(
    kind: ForestKind,
    name: String,
    base: Structure,
    seqs: Vec<Vec<Step>>,
    k: usize,
    tuple_ok: impl Fn(usize, &[Step], &[usize]) -> bool,
) -> Result<Cofree> {
    let index: HashMap<Vec<Step>, Elem> = seqs
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let parent: Vec<Option<Elem>> = seqs
        .iter()
        .map(|s| {
            if s.len() > 1 {
                Some(index[&s[..s.len() - 1]])
            } else {
                None
            }
        })
        .collect();
    let vocab = base.vocab().clone();
    let mut tuples: Vec<Vec<Vec<Elem>>> = vec![Vec::new(); vocab.len()];
    let mut lasts = Vec::new();
    for (x, s) in seqs.iter().enumerate() {
        let chain: Vec<Elem> = (1..=s.len())
            .map(|l| if l == s.len() { x } else { index[&s[..l]] })
            .collect();
        for (r, out) in tuples.iter_mut().enumerate() {
            for pos in chain_tuples(s.len(), vocab.arity(r), |pos| tuple_ok(r, s, pos)) {
                lasts.clear();
                lasts.extend(pos.iter().map(|&p| s[p].elem));
                if base.holds(r, &lasts) {
                    out.push(pos.iter().map(|&p| chain[p]).collect());
                }
            }
        }
    }
    let names: Vec<String> = seqs.iter().map(|s| seq_name(&base, s, kind)).collect();
    let point = if kind == ForestKind::Modal {
        Some(0)
    } else {
        None
    };
    let carrier = Structure::new(name, vocab, names, tuples, point)?;
    let pebble = (kind == ForestKind::Pebble).then(|| {
        seqs.iter()
            .map(|s| s.last().expect("non-empty").label)
            .collect()
    });
    let coalgebra = ForestCoalgebra::new(kind, carrier, parent, pebble, k)?;
    Ok(Cofree {
        coalgebra,
        base,
        seqs,
        index,
    })
}

fn with_i(a: &Structure, with_i: bool) -> Result<Structure> {
    if with_i {
        expand_equality(a)
    } else {
        Ok(a.clone())
    }
}

/// The EF comonad: non-empty sequences of length at most `k`, related when
/// pairwise comparable and related at their last elements.
pub fn build_ef(a: &Structure, k: usize, with_i_rel: bool, cap: usize) -> Result<Cofree> {
    if k == 0 {
        return Err(Error::Precondition("the EF comonad needs k >= 1".into()));
    }
    let base = with_i(a, with_i_rel)?;
    count_sequences(base.len(), k, cap)?;
    let steps: Vec<Step> = base.elems().map(|elem| Step { label: 0, elem }).collect();
    let seqs = enumerate(steps.iter().map(|&s| vec![s]).collect(), k, |_| {
        steps.clone()
    });
    let tag = if with_i_rel { "EI" } else { "E" };
    let name = format!("{tag}{k}({})", a.name());
    assemble(ForestKind::Ef, name, base, seqs, k, |_, _, _| true)
}

/// The pebbling comonad cut at plays of length `n`. Related sequences must
/// also satisfy the pebbling condition: the pebble of the earlier move is
/// not reused up to the later one.
pub fn build_pebble_truncated(
    a: &Structure,
    k: usize,
    n: usize,
    with_i_rel: bool,
    cap: usize,
) -> Result<Cofree> {
    if k == 0 || n == 0 {
        return Err(Error::Precondition(
            "the pebbling comonad needs k >= 1 and n >= 1".into(),
        ));
    }
    let base = with_i(a, with_i_rel)?;
    count_sequences(base.len().saturating_mul(k), n, cap)?;
    let steps: Vec<Step> = (1..=k)
        .flat_map(|label| base.elems().map(move |elem| Step { label, elem }))
        .collect();
    let seqs = enumerate(steps.iter().map(|&s| vec![s]).collect(), n, |_| {
        steps.clone()
    });
    let tag = if with_i_rel { "PI" } else { "P" };
    let name = format!("{tag}{k}n{n}({})", a.name());
    let pebbling_ok = |_: usize, s: &[Step], pos: &[usize]| {
        pos.iter().all(|&i| {
            pos.iter()
                .all(|&j| i >= j || s[i + 1..=j].iter().all(|st| st.label != s[i].label))
        })
    };
    assemble(ForestKind::Pebble, name, base, seqs, k, pebbling_ok)
}

/// The modal comonad: labelled paths of length at most `k` from the point.
pub fn build_modal(a: &Structure, k: usize, cap: usize) -> Result<Cofree> {
    if !a.vocab().is_modal() {
        return Err(Error::NonModalVocabulary);
    }
    let point = a.point().ok_or(Error::MissingPoint)?;
    let binary: Vec<usize> = a.vocab().of_arity(2).collect();
    let mut count = 1usize;
    let seqs = enumerate(
        vec![vec![Step {
            label: 0,
            elem: point,
        }]],
        k + 1,
        |s| {
            let last = s.last().expect("non-empty").elem;
            let next: Vec<Step> = binary
                .iter()
                .flat_map(|&r| {
                    a.successors(r, last)
                        .into_iter()
                        .map(move |elem| Step { label: r + 1, elem })
                })
                .collect();
            count += next.len();
            next
        },
    );
    if count > cap {
        return Err(overflow(cap));
    }
    let name = format!("M{k}({})", a.name());
    // a binary relation holds only along its own labelled step
    let along_step = |r: usize, s: &[Step], pos: &[usize]| match pos {
        [_] => true,
        [i, j] => *i + 1 == *j && s[*j].label == r + 1,
        _ => false,
    };
    assemble(ForestKind::Modal, name, a.clone(), seqs, k, along_step)
}

/// The coextension `f*` of a homomorphism `f` from the carrier of `x` to
/// the base of `target`: each element goes to the sequence of images of
/// its chain.
pub fn coextend(x: &ForestCoalgebra, f: &[Elem], target: &Cofree) -> Result<Vec<Elem>> {
    let tc = target.coalgebra();
    if x.kind() != tc.kind() {
        return Err(Error::KindMismatch(format!(
            "{} coalgebra against {} comonad",
            x.kind(),
            tc.kind()
        )));
    }
    if x.carrier().vocab() != target.base().vocab() {
        return Err(Error::VocabularyMismatch(format!(
            "{} vs {}",
            x.carrier().vocab(),
            target.base().vocab()
        )));
    }
    if !is_homomorphism(f, x.carrier(), target.base())? {
        return Err(Error::NotHomomorphism(
            "the map to coextend does not preserve the relations".into(),
        ));
    }
    let mut out = Vec::with_capacity(x.len());
    let mut seq = Vec::new();
    for e in 0..x.len() {
        seq.clear();
        for &c in x.chain(e) {
            let label = match x.kind() {
                ForestKind::Ef => 0,
                ForestKind::Pebble => x.pebble(c).expect("pebble kind"),
                ForestKind::Modal => match x.parent(c) {
                    None => 0,
                    Some(_) => {
                        x.cover_label(c).ok_or_else(|| {
                            Error::InvalidCoalgebra(format!(
                                "cover at {} has no unique label",
                                x.carrier().elem_name(c)
                            ))
                        })? + 1
                    }
                },
            };
            seq.push(Step { label, elem: f[c] });
        }
        let y = target.lookup(&seq).ok_or_else(|| {
            Error::Precondition(format!(
                "{} has no image within the comonad's bound",
                x.carrier().elem_name(e)
            ))
        })?;
        out.push(y);
    }
    if !is_coalgebra_morphism(x, tc, &out) {
        return Err(Error::Internal(
            "coextension is not a coalgebra morphism".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_structure;

    fn names(c: &Cofree) -> Vec<&str> {
        c.coalgebra()
            .carrier()
            .elem_names()
            .iter()
            .map(String::as_str)
            .collect()
    }

    #[test]
    fn ef_on_loop() {
        let lp = parse_structure("vocab E/2\nstructure L\nelems u\nrel E u u").unwrap();
        let c = build_ef(&lp, 2, false, DEFAULT_CARRIER_CAP).unwrap();
        assert_eq!(names(&c), ["[u]", "[u,u]"]);
        assert_eq!(c.coalgebra().carrier().relation(0).len(), 4);
        assert!(c.coalgebra().is_valid());
    }

    #[test]
    fn ef_edge_depth_one_has_no_tuples() {
        let edge = parse_structure("vocab E/2\nstructure D\nelems v w\nrel E v w").unwrap();
        let c = build_ef(&edge, 1, false, DEFAULT_CARRIER_CAP).unwrap();
        assert_eq!(names(&c), ["[v]", "[w]"]);
        assert_eq!(c.coalgebra().carrier().tuple_count(), 0);
        let ci = build_ef(&edge, 2, true, DEFAULT_CARRIER_CAP).unwrap();
        let carrier = ci.coalgebra().carrier();
        let i = carrier.vocab().index_of("I").unwrap();
        assert!(carrier.elems().all(|e| carrier.holds(i, &[e, e])));
    }

    #[test]
    fn modal_paths() {
        let chain =
            parse_structure("vocab R/2\nstructure C\nelems a b\nrel R a b\npoint a").unwrap();
        assert_eq!(
            build_modal(&chain, 2, DEFAULT_CARRIER_CAP)
                .unwrap()
                .coalgebra()
                .len(),
            2
        );
        let lp = parse_structure("vocab R/2\nstructure L\nelems a\nrel R a a\npoint a").unwrap();
        let m = build_modal(&lp, 2, DEFAULT_CARRIER_CAP).unwrap();
        assert_eq!(names(&m), ["a", "a-R->a", "a-R->a-R->a"]);
        assert!(m.coalgebra().is_valid());
        let lone = parse_structure("vocab R/2\nstructure P\nelems a\npoint a").unwrap();
        assert_eq!(
            build_modal(&lone, 3, DEFAULT_CARRIER_CAP)
                .unwrap()
                .coalgebra()
                .len(),
            1
        );
    }

    #[test]
    fn modal_labels_kept_apart() {
        let s = parse_structure(
            "vocab R/2 S/2 P/1\nstructure M\nelems a b\nrel R a b\nrel S a b\nrel P b\npoint a",
        )
        .unwrap();
        let m = build_modal(&s, 1, DEFAULT_CARRIER_CAP).unwrap();
        assert_eq!(m.coalgebra().len(), 3);
        assert!(m.coalgebra().is_valid(), "{:?}", m.coalgebra().validate());
    }

    #[test]
    fn pebbles_on_loop() {
        let lp = parse_structure("vocab E/2\nstructure L\nelems u\nrel E u u").unwrap();
        let p = build_pebble_truncated(&lp, 1, 2, false, DEFAULT_CARRIER_CAP).unwrap();
        assert_eq!(names(&p), ["[1:u]", "[1:u,1:u]"]);
        let carrier = p.coalgebra().carrier();
        assert!(carrier.holds(0, &[0, 0]) && carrier.holds(0, &[1, 1]));
        assert!(!carrier.holds(0, &[0, 1]) && !carrier.holds(0, &[1, 0]));
        assert!(p.coalgebra().is_valid());
        let two = parse_structure("vocab E/2\nstructure T\nelems a b").unwrap();
        let q = build_pebble_truncated(&two, 3, 1, false, DEFAULT_CARRIER_CAP).unwrap();
        assert_eq!(q.coalgebra().len(), 6);
        assert!((0..6).all(|x| q.coalgebra().pebble(x) == Some(q.seq(x)[0].label)));
    }

    #[test]
    fn cap_enforced() {
        let lp = parse_structure("vocab E/2\nstructure L\nelems u v w").unwrap();
        assert!(matches!(
            build_ef(&lp, 5, false, 100),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn counit_coextends_to_identity() {
        let edge = parse_structure("vocab E/2\nstructure D\nelems v w\nrel E v w").unwrap();
        let c = build_ef(&edge, 2, true, DEFAULT_CARRIER_CAP).unwrap();
        let id = coextend(c.coalgebra(), &c.counit_map(), &c).unwrap();
        assert_eq!(id, (0..c.coalgebra().len()).collect::<Vec<_>>());
    }
}
