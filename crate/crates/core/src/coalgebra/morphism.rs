//! Morphisms of forest coalgebras: verification, search and the
//! (quotient, pathwise embedding) factorisation.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::coalgebra::{local_ok, require_compatible, ForestCoalgebra, ForestKind};
use crate::error::{Error, Result};
use crate::structure::{is_homomorphism, Elem, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MorphismKind {
    Hom,
    /// A homomorphism of coalgebras over a vocabulary containing `I`.
    IMorphism,
    Pathwise,
    OpenPathwise,
}

impl MorphismKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MorphismKind::Hom => "hom",
            MorphismKind::IMorphism => "i-morphism",
            MorphismKind::Pathwise => "pathwise",
            MorphismKind::OpenPathwise => "open",
        }
    }

    fn required(self) -> &'static [MorphismTag] {
        match self {
            MorphismKind::Hom => &[MorphismTag::Forest, MorphismTag::Hom],
            MorphismKind::IMorphism => &[
                MorphismTag::Forest,
                MorphismTag::Hom,
                MorphismTag::IMorphism,
            ],
            MorphismKind::Pathwise => &[
                MorphismTag::Forest,
                MorphismTag::Hom,
                MorphismTag::PathwiseEmbedding,
            ],
            MorphismKind::OpenPathwise => &[
                MorphismTag::Forest,
                MorphismTag::Hom,
                MorphismTag::PathwiseEmbedding,
                MorphismTag::Open,
            ],
        }
    }
}

impl fmt::Display for MorphismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MorphismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hom" => Ok(MorphismKind::Hom),
            "i-morphism" | "imorphism" => Ok(MorphismKind::IMorphism),
            "pathwise" => Ok(MorphismKind::Pathwise),
            "open" | "open-pathwise" => Ok(MorphismKind::OpenPathwise),
            _ => Err(Error::Precondition(format!("unknown morphism kind {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MorphismTag {
    Hom,
    Forest,
    PebblePreserving,
    IMorphism,
    PathwiseEmbedding,
    Open,
    Bijection,
}

impl MorphismTag {
    pub fn as_str(self) -> &'static str {
        match self {
            MorphismTag::Hom => "hom",
            MorphismTag::Forest => "forest",
            MorphismTag::PebblePreserving => "pebble-preserving",
            MorphismTag::IMorphism => "I-morphism",
            MorphismTag::PathwiseEmbedding => "pathwise-embedding",
            MorphismTag::Open => "open",
            MorphismTag::Bijection => "bijection",
        }
    }
}

impl fmt::Display for MorphismTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A map between coalgebra universes with the properties it was checked to have.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismWitness {
    pub map: Vec<Elem>,
    pub verified: BTreeSet<MorphismTag>,
}

impl MorphismWitness {
    pub fn has(&self, tag: MorphismTag) -> bool {
        self.verified.contains(&tag)
    }

    pub fn is(&self, kind: MorphismKind) -> bool {
        kind.required().iter().all(|&t| self.has(t))
    }
}

fn check_map(x: &ForestCoalgebra, y: &ForestCoalgebra, f: &[Elem]) -> Result<()> {
    if f.len() != x.len() || f.iter().any(|&e| e >= y.len()) {
        return Err(Error::Precondition(format!(
            "map must send each of the {} elements into a universe of size {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

fn is_forest_map(x: &ForestCoalgebra, y: &ForestCoalgebra, f: &[Elem]) -> bool {
    (0..x.len()).all(|e| y.parent(f[e]) == x.parent(e).map(|p| f[p]))
}

fn preserves_pebbles(x: &ForestCoalgebra, y: &ForestCoalgebra, f: &[Elem]) -> bool {
    (0..x.len()).all(|e| x.pebble(e) == y.pebble(f[e]))
}

/// Forest morphism, pebble-preserving, and a homomorphism of carriers.
pub(crate) fn is_coalgebra_morphism(x: &ForestCoalgebra, y: &ForestCoalgebra, f: &[Elem]) -> bool {
    f.len() == x.len()
        && f.iter().all(|&e| e < y.len())
        && is_forest_map(x, y, f)
        && preserves_pebbles(x, y, f)
        && is_homomorphism(f, x.carrier(), y.carrier()).unwrap_or(false)
}

/// Cover lifting: each root of `y` is hit by a root of `x`, and each cover
/// `f(e) ⋖ c` lifts to a cover `e ⋖ e'` with `f(e') = c`. Returns where it fails.
pub fn open_violation(x: &ForestCoalgebra, y: &ForestCoalgebra, f: &[Elem]) -> Option<String> {
    for &r in y.roots() {
        if !x.roots().iter().any(|&xr| f[xr] == r) {
            return Some(format!(
                "root {} of the codomain is not hit",
                y.carrier().elem_name(r)
            ));
        }
    }
    for e in 0..x.len() {
        for &c in y.children(f[e]) {
            if !x.children(e).iter().any(|&d| f[d] == c) {
                return Some(format!("open violated at {}", x.carrier().elem_name(e)));
            }
        }
    }
    None
}

/// Runs every verifier on `f` and records the tags that hold.
pub fn check_morphism(
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
    f: &[Elem],
) -> Result<MorphismWitness> {
    require_compatible(x, y)?;
    check_map(x, y, f)?;
    let mut tags = BTreeSet::new();
    let forest = is_forest_map(x, y, f);
    let pebbles = preserves_pebbles(x, y, f);
    let hom = is_homomorphism(f, x.carrier(), y.carrier())?;
    if forest {
        tags.insert(MorphismTag::Forest);
    }
    if pebbles && x.kind() == ForestKind::Pebble {
        tags.insert(MorphismTag::PebblePreserving);
    }
    if hom {
        tags.insert(MorphismTag::Hom);
    }
    let morphism = forest && pebbles && hom;
    if morphism && x.carrier().vocab().has_equality() {
        tags.insert(MorphismTag::IMorphism);
    }
    if morphism && (0..x.len()).all(|e| local_ok(x, e, y, f[e], true)) {
        tags.insert(MorphismTag::PathwiseEmbedding);
        if open_violation(x, y, f).is_none() {
            tags.insert(MorphismTag::Open);
        }
    }
    let mut hit = vec![false; y.len()];
    for &v in f {
        hit[v] = true;
    }
    if f.len() == y.len() && hit.iter().all(|&h| h) {
        tags.insert(MorphismTag::Bijection);
    }
    Ok(MorphismWitness {
        map: f.to_vec(),
        verified: tags,
    })
}

struct Search<'a> {
    x: &'a ForestCoalgebra,
    y: &'a ForestCoalgebra,
    reflect: bool,
    open: bool,
    memo: Vec<Option<bool>>,
}

impl Search<'_> {
    fn sub(&mut self, a: Elem, b: Elem) -> bool {
        let key = a * self.y.len() + b;
        if let Some(v) = self.memo[key] {
            return v;
        }
        let (x, y) = (self.x, self.y);
        let ok = local_ok(x, a, y, b, self.reflect)
            && self.assign(x.children(a), y.children(b)).is_some();
        self.memo[key] = Some(ok);
        ok
    }

    /// Chooses an image among `targets` for each of `sources`, covering all
    /// targets when searching for open maps.
    fn assign(&mut self, sources: &[Elem], targets: &[Elem]) -> Option<Vec<Elem>> {
        let options: Vec<Vec<usize>> = sources
            .iter()
            .map(|&s| {
                (0..targets.len())
                    .filter(|&j| self.sub(s, targets[j]))
                    .collect()
            })
            .collect();
        if options.iter().any(Vec::is_empty) {
            return None;
        }
        let mut choice: Vec<usize> = options.iter().map(|o| o[0]).collect();
        if self.open {
            // match every target to a distinct source (augmenting paths)
            let mut owner: Vec<Option<usize>> = vec![None; targets.len()];
            let mut taken: Vec<Option<usize>> = vec![None; sources.len()];
            for t in 0..targets.len() {
                let mut seen = vec![false; sources.len()];
                if !augment(t, &options, &mut owner, &mut taken, &mut seen) {
                    return None;
                }
            }
            for (s, t) in taken.iter().enumerate() {
                if let Some(t) = t {
                    choice[s] = *t;
                }
            }
        }
        Some(choice.into_iter().map(|j| targets[j]).collect())
    }

    fn fill(&mut self, a: Elem, b: Elem, map: &mut [Elem]) {
        map[a] = b;
        let (x, y) = (self.x, self.y);
        let images = self
            .assign(x.children(a), y.children(b))
            .expect("feasible by memo");
        for (&c, d) in x.children(a).iter().zip(images) {
            self.fill(c, d, map);
        }
    }
}

fn augment(
    t: usize,
    options: &[Vec<usize>],
    owner: &mut [Option<usize>],
    taken: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for s in 0..options.len() {
        if seen[s] || !options[s].contains(&t) {
            continue;
        }
        seen[s] = true;
        let free = match taken[s] {
            None => true,
            Some(t2) => augment(t2, options, owner, taken, seen),
        };
        if free {
            taken[s] = Some(t);
            owner[t] = Some(s);
            return true;
        }
    }
    false
}

/// First morphism of the requested kind in canonical order (roots and
/// children tried in element order), verified before it is returned.
pub fn find_morphism(
    kind: MorphismKind,
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
) -> Result<Option<MorphismWitness>> {
    require_compatible(x, y)?;
    x.require_valid("domain")?;
    y.require_valid("codomain")?;
    if kind == MorphismKind::IMorphism && !x.carrier().vocab().has_equality() {
        return Err(Error::KindMismatch(
            "I-morphisms need the symbol I in the vocabulary".into(),
        ));
    }
    Ok(search(kind, x, y))
}

/// [`find_morphism`] without the input checks, for callers that validated already.
pub(crate) fn search(
    kind: MorphismKind,
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
) -> Option<MorphismWitness> {
    let reflect = matches!(kind, MorphismKind::Pathwise | MorphismKind::OpenPathwise);
    let open = kind == MorphismKind::OpenPathwise;
    let mut s = Search {
        x,
        y,
        reflect,
        open,
        memo: vec![None; x.len() * y.len()],
    };
    let roots = s.assign(x.roots(), y.roots())?;
    let mut map = vec![0; x.len()];
    for (&a, b) in x.roots().iter().zip(roots) {
        s.fill(a, b, &mut map);
    }
    let w = check_morphism(x, y, &map).expect("compatible inputs");
    assert!(w.is(kind), "search produced a map failing its own check");
    Some(w)
}

/// Openness by enumerating commutative squares of path embeddings and
/// looking for a diagonal filler in each.
///
/// Up to isomorphism a square is a pair `u ∈ X ∪ {⊥}`, `v ∈ Y` with
/// `f(u) ≤ v` such that `f` embeds `↓u`; a filler is some `u' ≥ u` with
/// `f(u') = v` whose chain `f` maps isomorphically onto `↓v`.
pub fn is_open_by_squares(x: &ForestCoalgebra, y: &ForestCoalgebra, f: &[Elem]) -> Result<bool> {
    require_compatible(x, y)?;
    check_map(x, y, f)?;
    if !is_coalgebra_morphism(x, y, f) {
        return Err(Error::NotForestMorphism(
            "openness is only defined for coalgebra morphisms".into(),
        ));
    }
    let xs = x.carrier();
    let ys = y.carrier();
    let chain_iso = |u: Elem, v: Elem| -> bool {
        let (cu, cv) = (x.chain(u), y.chain(v));
        if cu.len() != cv.len()
            || cu
                .iter()
                .zip(cv)
                .any(|(&a, &b)| f[a] != b || x.pebble(a) != y.pebble(b))
        {
            return false;
        }
        // the inverse d: ↓v → ↓u must preserve every tuple of Y on ↓v
        let inverse = |b: Elem| cv.iter().position(|&c| c == b).map(|i| cu[i]);
        let on_chain = |t: &[Elem]| t.iter().map(|&b| inverse(b)).collect::<Option<Vec<Elem>>>();
        (0..ys.vocab().len()).all(|r| {
            ys.relation(r).tuples().iter().all(|t| match on_chain(t) {
                Some(pre) => xs.holds(r, &pre),
                None => true,
            })
        })
    };
    let embeds = |u: Elem| -> bool {
        let cu = x.chain(u);
        let inverse = |b: Elem| cu.iter().position(|&a| f[a] == b).map(|i| cu[i]);
        (0..ys.vocab().len()).all(|r| {
            ys.relation(r).tuples().iter().all(|t| {
                match t.iter().map(|&b| inverse(b)).collect::<Option<Vec<Elem>>>() {
                    Some(pre) => xs.holds(r, &pre),
                    None => true,
                }
            })
        })
    };
    let starts: Vec<Option<Elem>> = std::iter::once(None)
        .chain((0..x.len()).map(Some))
        .collect();
    for u in starts {
        if let Some(u) = u {
            if !embeds(u) {
                continue;
            }
        }
        for v in 0..y.len() {
            let below = match u {
                None => true,
                Some(u) => y.leq(f[u], v),
            };
            if !below {
                continue;
            }
            let filled = (0..x.len())
                .any(|u2| u.is_none_or(|u| x.leq(u, u2)) && f[u2] == v && chain_iso(u2, v));
            if !filled {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `f = g ∘ e` with `e` the identity onto `X°` (same forest as `X`, with the
/// relations of `Y` pulled back along branches) and `g` a pathwise embedding.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub middle: ForestCoalgebra,
    pub e: MorphismWitness,
    pub g: MorphismWitness,
}

pub fn factor_xo(x: &ForestCoalgebra, y: &ForestCoalgebra, f: &[Elem]) -> Result<Factorization> {
    require_compatible(x, y)?;
    check_map(x, y, f)?;
    if !is_coalgebra_morphism(x, y, f) {
        return Err(Error::NotHomomorphism(
            "the map to factor is not a coalgebra morphism".into(),
        ));
    }
    let middle = pullback(x, y, f)?;
    let id: Vec<Elem> = (0..x.len()).collect();
    let e = check_morphism(x, &middle, &id)?;
    let g = check_morphism(&middle, y, f)?;
    if !e.is(MorphismKind::Hom) || !g.is(MorphismKind::Pathwise) {
        return Err(Error::Internal(
            "factorisation failed its own verification".into(),
        ));
    }
    Ok(Factorization { middle, e, g })
}

/// `x` with the relations of `y` pulled back along `f` on every branch.
pub(crate) fn pullback(
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
    f: &[Elem],
) -> Result<ForestCoalgebra> {
    let xs = x.carrier();
    let vocab = xs.vocab().clone();
    if !is_forest_map(x, y, f) {
        return Err(Error::NotForestMorphism(
            "relations are pulled back along forest morphisms only".into(),
        ));
    }
    // f maps ↓e onto ↓f(e) depth by depth, so tuples on the branch of f(e)
    // come back through the chain of e
    let mut tuples: Vec<Vec<Vec<Elem>>> = vec![Vec::new(); vocab.len()];
    for e in 0..x.len() {
        let chain = x.chain(e);
        for (r, t) in y.tuples_at(f[e]) {
            tuples[*r].push(t.iter().map(|&b| chain[y.depth(b) - 1]).collect());
        }
    }
    let carrier = Structure::new(
        format!("{}_o", xs.name()),
        vocab,
        xs.elem_names().to_vec(),
        tuples,
        xs.point(),
    )?;
    x.with_carrier(carrier)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::{build_ef, DEFAULT_CARRIER_CAP};
    use crate::io::parse_structure;

    fn ef(src: &str, k: usize, with_i: bool) -> ForestCoalgebra {
        build_ef(
            &parse_structure(src).unwrap(),
            k,
            with_i,
            DEFAULT_CARRIER_CAP,
        )
        .unwrap()
        .into_coalgebra()
    }

    const EDGE: &str = "vocab E/2\nstructure D\nelems v w\nrel E v w";
    const LOOP: &str = "vocab E/2\nstructure L\nelems u\nrel E u u";

    #[test]
    fn identity_has_every_kind() {
        let x = ef(EDGE, 2, true);
        let id: Vec<Elem> = (0..x.len()).collect();
        let w = check_morphism(&x, &x, &id).unwrap();
        for kind in [
            MorphismKind::Hom,
            MorphismKind::IMorphism,
            MorphismKind::Pathwise,
            MorphismKind::OpenPathwise,
        ] {
            assert!(w.is(kind));
        }
        assert!(w.has(MorphismTag::Bijection));
        assert!(is_open_by_squares(&x, &x, &id).unwrap());
    }

    #[test]
    fn edge_to_loop() {
        let (x, y) = (ef(EDGE, 2, false), ef(LOOP, 2, false));
        assert!(find_morphism(MorphismKind::Hom, &x, &y).unwrap().is_some());
        let (xi, yi) = (ef(EDGE, 2, true), ef(LOOP, 2, true));
        assert!(find_morphism(MorphismKind::Pathwise, &xi, &yi)
            .unwrap()
            .is_none());
        assert!(find_morphism(MorphismKind::IMorphism, &xi, &yi)
            .unwrap()
            .is_some());
        assert!(find_morphism(MorphismKind::IMorphism, &x, &y).is_err());
    }

    #[test]
    fn open_needs_surjective_covers() {
        let one = ef("vocab E/2\nstructure O\nelems a", 1, true);
        let two = ef("vocab E/2\nstructure T\nelems a b", 1, true);
        assert!(find_morphism(MorphismKind::Pathwise, &one, &two)
            .unwrap()
            .is_some());
        assert!(find_morphism(MorphismKind::OpenPathwise, &one, &two)
            .unwrap()
            .is_none());
        let w = find_morphism(MorphismKind::OpenPathwise, &two, &one)
            .unwrap()
            .unwrap();
        assert_eq!(w.map, vec![0, 0]);
        assert!(is_open_by_squares(&two, &one, &w.map).unwrap());
        assert!(!is_open_by_squares(&one, &two, &[0]).unwrap());
    }

    #[test]
    fn factorisation_pulls_back_relations() {
        let lp = ef(LOOP, 2, false);
        let bare = ForestCoalgebra::new(
            ForestKind::Ef,
            parse_structure("vocab E/2\nstructure C\nelems v w").unwrap(),
            vec![None, Some(0)],
            None,
            2,
        )
        .unwrap();
        let fx = factor_xo(&bare, &lp, &[0, 1]).unwrap();
        assert_eq!(fx.middle.carrier().relation(0).len(), 4);
        assert!(fx.middle.is_valid());
        let already = factor_xo(&lp, &lp, &[0, 1]).unwrap();
        assert_eq!(
            already.middle.carrier().relation(0).len(),
            lp.carrier().relation(0).len()
        );
    }
}
