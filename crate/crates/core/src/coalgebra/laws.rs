//! Randomised checks of the comonad laws through coextension.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coalgebra::build::{
    build_ef, build_modal, build_pebble_truncated, coextend, Cofree, DEFAULT_CARRIER_CAP,
};
use crate::coalgebra::{ForestCoalgebra, ForestKind};
use crate::error::{Error, Result};
use crate::structure::{expand_equality, is_homomorphism, Elem, Structure, Vocabulary};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LawReport {
    pub instances: usize,
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn all_hold(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A homomorphism from the carrier of `x` into `b`, built branch by branch
/// with shuffled candidates. The modal root goes to the point of `b`.
pub fn random_homomorphism<R: Rng>(
    x: &ForestCoalgebra,
    b: &Structure,
    rng: &mut R,
) -> Option<Vec<Elem>> {
    if b.is_empty() && !x.is_empty() {
        return None;
    }
    let c = x.carrier();
    let mut f = vec![usize::MAX; x.len()];
    let mut candidates: Vec<Elem> = b.elems().collect();
    let mut image = Vec::new();
    for e in x.by_depth() {
        if x.kind() == ForestKind::Modal && x.parent(e).is_none() {
            f[e] = b.point()?;
            continue;
        }
        candidates.shuffle(rng);
        let pick = candidates.iter().copied().find(|&v| {
            f[e] = v;
            x.tuples_at(e).iter().all(|(r, t)| {
                image.clear();
                image.extend(t.iter().map(|&a| f[a]));
                b.holds(*r, &image)
            })
        })?;
        f[e] = pick;
    }
    is_homomorphism(&f, c, b).ok()?.then_some(f)
}

/// At most four elements; element 0 lies in every tuple of every relation
/// that mentions it, so homomorphisms into it always exist.
fn random_target<R: Rng>(
    vocab: &Vocabulary,
    pointed: bool,
    tag: usize,
    rng: &mut R,
) -> Result<Structure> {
    let n: usize = rng.gen_range(1..=4);
    let names = (0..n).map(|i| format!("t{i}")).collect();
    let mut tuples = Vec::with_capacity(vocab.len());
    for r in 0..vocab.len() {
        let arity = vocab.arity(r);
        let mut ts = Vec::new();
        for code in 0..n.pow(arity as u32) {
            let mut c = code;
            let mut t = vec![0; arity];
            for slot in t.iter_mut().rev() {
                *slot = c % n;
                c /= n;
            }
            if t.contains(&0) || rng.gen_bool(0.3) {
                ts.push(t);
            }
        }
        tuples.push(ts);
    }
    Structure::new(
        format!("T{tag}"),
        vocab.clone(),
        names,
        tuples,
        pointed.then_some(0),
    )
}

fn cofree(kind: ForestKind, s: &Structure, k: usize, n: usize) -> Result<Cofree> {
    match kind {
        ForestKind::Ef => build_ef(s, k, false, DEFAULT_CARRIER_CAP),
        ForestKind::Pebble => build_pebble_truncated(s, k, n, false, DEFAULT_CARRIER_CAP),
        ForestKind::Modal => build_modal(s, k, DEFAULT_CARRIER_CAP),
    }
}

fn compose(g: &[Elem], f: &[Elem]) -> Vec<Elem> {
    f.iter().map(|&e| g[e]).collect()
}

/// Checks `ε* = id`, `ε ∘ f* = f` and `(g ∘ f*)* = g* ∘ f*` on `samples`
/// random homomorphisms `f`, `g` out of the cofree coalgebra on `a`.
/// With `with_i` the comonad is applied to `a` expanded with equality.
pub fn check_laws(
    kind: ForestKind,
    a: &Structure,
    k: usize,
    n: usize,
    with_i: bool,
    samples: usize,
    seed: u64,
) -> Result<LawReport> {
    if kind == ForestKind::Pebble && n == 0 {
        return Err(Error::Precondition(
            "the pebble comonad needs at least one pebble".into(),
        ));
    }
    let base = if with_i {
        expand_equality(a)?
    } else {
        a.clone()
    };
    let pointed = kind == ForestKind::Modal;
    let fa = cofree(kind, &base, k, n)?;
    let x = fa.coalgebra();
    let mut report = LawReport::default();
    let id: Vec<Elem> = (0..x.len()).collect();

    report.instances += 1;
    if coextend(x, &fa.counit_map(), &fa)? != id {
        report
            .failures
            .push("counit does not coextend to the identity".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = base.vocab();
    let mut tag = 0;
    while report.instances < samples {
        tag += 1;
        let b = random_target(vocab, pointed, 2 * tag, &mut rng)?;
        let c = random_target(vocab, pointed, 2 * tag + 1, &mut rng)?;
        let fb = cofree(kind, &b, k, n)?;
        let fc = cofree(kind, &c, k, n)?;
        let f = random_homomorphism(x, &b, &mut rng)
            .ok_or_else(|| Error::Internal("no map into a target".into()))?;
        let g = random_homomorphism(fb.coalgebra(), &c, &mut rng)
            .ok_or_else(|| Error::Internal("no map into a target".into()))?;
        let f_star = coextend(x, &f, &fb)?;

        report.instances += 1;
        if compose(&fb.counit_map(), &f_star) != f {
            report.failures.push(format!(
                "counit after coextension differs from the map into {}",
                b.name()
            ));
        }
        if report.instances >= samples {
            break;
        }

        report.instances += 1;
        let g_star = coextend(fb.coalgebra(), &g, &fc)?;
        let lhs = coextend(x, &compose(&g, &f_star), &fc)?;
        if lhs != compose(&g_star, &f_star) {
            report.failures.push(format!(
                "coextension is not functorial through {} and {}",
                b.name(),
                c.name()
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_structure;

    #[test]
    fn laws_hold_on_small_inputs() {
        let a = parse_structure("vocab E/2\nstructure A\nelems u v\nrel E u v").unwrap();
        for (kind, with_i) in [
            (ForestKind::Ef, false),
            (ForestKind::Ef, true),
            (ForestKind::Pebble, false),
        ] {
            let r = check_laws(kind, &a, 2, 2, with_i, 12, 7).unwrap();
            assert_eq!(r.instances, 12);
            assert!(r.all_hold(), "{kind}: {:?}", r.failures);
        }
        let m =
            parse_structure("vocab R/2 p/1\nstructure M\nelems a b\nrel R a b\nrel p b\npoint a")
                .unwrap();
        assert!(check_laws(ForestKind::Modal, &m, 2, 0, false, 9, 1)
            .unwrap()
            .all_hold());
    }

    #[test]
    fn random_maps_are_homomorphisms() {
        let a =
            parse_structure("vocab E/2\nstructure A\nelems u v w\nrel E u v\nrel E v w").unwrap();
        let x = build_ef(&a, 2, false, DEFAULT_CARRIER_CAP)
            .unwrap()
            .into_coalgebra();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for tag in 0..20 {
            let b = random_target(a.vocab(), false, tag, &mut rng).unwrap();
            let f = random_homomorphism(&x, &b, &mut rng).unwrap();
            assert!(is_homomorphism(&f, x.carrier(), &b).unwrap());
        }
    }
}
