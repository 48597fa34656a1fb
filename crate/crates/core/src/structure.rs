//! Finite relational vocabularies and structures.
//!
//! A [`Structure`] is immutable once built. Elements are dense indices
//! (`0..len()`) carrying opaque names; declaration order is the canonical
//! order used by every search in the crate.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Index of an element in a structure's universe.
pub type Elem = usize;

/// Reserved name of the equality surrogate relation.
pub const EQUALITY_SYMBOL: &str = "I";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelSymbol {
    pub name: String,
    pub arity: usize,
}

/// A finite relational vocabulary, kept sorted by relation name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Vocabulary {
    rels: Vec<RelSymbol>,
}

impl Vocabulary {
    pub fn new<I, S>(rels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<RelSymbol> = rels
            .into_iter()
            .map(|(name, arity)| RelSymbol {
                name: name.into(),
                arity,
            })
            .collect();
        out.sort();
        for w in out.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::InvalidStructure(format!(
                    "duplicate relation declaration {}",
                    w[0].name
                )));
            }
        }
        Ok(Vocabulary { rels: out })
    }

    pub fn symbols(&self) -> &[RelSymbol] {
        &self.rels
    }

    pub fn len(&self) -> usize {
        self.rels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rels.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.rels
            .binary_search_by(|r| r.name.as_str().cmp(name))
            .ok()
    }

    pub fn name(&self, rel: usize) -> &str {
        &self.rels[rel].name
    }

    pub fn arity(&self, rel: usize) -> usize {
        self.rels[rel].arity
    }

    /// True iff every relation is unary or binary.
    pub fn is_modal(&self) -> bool {
        self.rels.iter().all(|r| r.arity == 1 || r.arity == 2)
    }

    pub fn has_equality(&self) -> bool {
        self.index_of(EQUALITY_SYMBOL).is_some()
    }

    pub fn equality_index(&self) -> Option<usize> {
        self.index_of(EQUALITY_SYMBOL)
    }

    /// Relation indices of the given arity, in vocabulary order.
    pub fn of_arity(&self, arity: usize) -> impl Iterator<Item = usize> + '_ {
        self.rels
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.arity == arity)
            .map(|(i, _)| i)
    }

    pub fn with_equality(&self) -> Result<Vocabulary> {
        if self.has_equality() {
            return Err(Error::Precondition(
                "vocabulary already contains the symbol I".into(),
            ));
        }
        let mut rels = self.rels.clone();
        rels.push(RelSymbol {
            name: EQUALITY_SYMBOL.into(),
            arity: 2,
        });
        rels.sort();
        Ok(Vocabulary { rels })
    }

    pub fn without_equality(&self) -> Vocabulary {
        Vocabulary {
            rels: self
                .rels
                .iter()
                .filter(|r| r.name != EQUALITY_SYMBOL)
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .rels
            .iter()
            .map(|r| format!("{}/{}", r.name, r.arity))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

const DENSE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone)]
enum TupleIndex {
    Dense { n: usize, bits: FixedBitSet },
    Sparse(HashSet<Vec<Elem>>),
}

/// The interpretation of one relation symbol.
#[derive(Debug, Clone)]
pub struct Relation {
    arity: usize,
    tuples: Vec<Vec<Elem>>,
    index: TupleIndex,
}

fn dense_size(n: usize, arity: usize) -> Option<usize> {
    let mut size: usize = 1;
    for _ in 0..arity {
        size = size.checked_mul(n)?;
        if size > DENSE_LIMIT {
            return None;
        }
    }
    Some(size)
}

fn dense_pos(n: usize, t: &[Elem]) -> usize {
    t.iter().fold(0, |acc, &e| acc * n + e)
}

impl Relation {
    fn new(arity: usize, n: usize, tuples: Vec<Vec<Elem>>) -> Relation {
        let index = match dense_size(n, arity) {
            Some(size) => {
                let mut bits = FixedBitSet::with_capacity(size);
                for t in &tuples {
                    bits.insert(dense_pos(n, t));
                }
                TupleIndex::Dense { n, bits }
            }
            None => TupleIndex::Sparse(tuples.iter().cloned().collect()),
        };
        Relation {
            arity,
            tuples,
            index,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Tuples in insertion order, without duplicates.
    pub fn tuples(&self) -> &[Vec<Elem>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[Elem]) -> bool {
        match &self.index {
            TupleIndex::Dense { n, bits } => {
                if t.iter().any(|&e| e >= *n) {
                    return false;
                }
                bits.contains(dense_pos(*n, t))
            }
            TupleIndex::Sparse(set) => set.contains(t),
        }
    }

    fn tuple_set(&self) -> BTreeSet<&Vec<Elem>> {
        self.tuples.iter().collect()
    }
}

/// A finite relational structure, optionally pointed.
#[derive(Debug, Clone)]
pub struct Structure {
    name: String,
    vocab: Vocabulary,
    elems: Vec<String>,
    index: HashMap<String, Elem>,
    rels: Vec<Relation>,
    point: Option<Elem>,
}

impl Structure {
    /// Builds a structure from raw parts. `tuples[r]` holds the tuples of
    /// relation `r` (vocabulary order); duplicates are dropped.
    pub fn new(
        name: impl Into<String>,
        vocab: Vocabulary,
        elems: Vec<String>,
        tuples: Vec<Vec<Vec<Elem>>>,
        point: Option<Elem>,
    ) -> Result<Structure> {
        if tuples.len() != vocab.len() {
            return Err(Error::InvalidStructure(format!(
                "expected {} relation interpretations, got {}",
                vocab.len(),
                tuples.len()
            )));
        }
        let mut index = HashMap::with_capacity(elems.len());
        for (i, e) in elems.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::InvalidStructure(format!("duplicate element {e}")));
            }
        }
        let n = elems.len();
        let mut rels = Vec::with_capacity(vocab.len());
        for (r, ts) in tuples.into_iter().enumerate() {
            let arity = vocab.arity(r);
            let mut seen = HashSet::new();
            let mut kept = Vec::with_capacity(ts.len());
            for t in ts {
                if t.len() != arity {
                    return Err(Error::InvalidStructure(format!(
                        "arity mismatch for {}: expected {}, got {}",
                        vocab.name(r),
                        arity,
                        t.len()
                    )));
                }
                if let Some(&bad) = t.iter().find(|&&e| e >= n) {
                    return Err(Error::InvalidStructure(format!(
                        "element index {bad} out of range"
                    )));
                }
                if seen.insert(t.clone()) {
                    kept.push(t);
                }
            }
            rels.push(Relation::new(arity, n, kept));
        }
        if let Some(p) = point {
            if p >= n {
                return Err(Error::InvalidStructure("point outside the universe".into()));
            }
        }
        Ok(Structure {
            name: name.into(),
            vocab,
            elems,
            index,
            rels,
            point,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> std::ops::Range<Elem> {
        0..self.elems.len()
    }

    pub fn elem_name(&self, e: Elem) -> &str {
        &self.elems[e]
    }

    pub fn elem_names(&self) -> &[String] {
        &self.elems
    }

    pub fn elem_index(&self, name: &str) -> Option<Elem> {
        self.index.get(name).copied()
    }

    pub fn relation(&self, rel: usize) -> &Relation {
        &self.rels[rel]
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&Relation> {
        self.vocab.index_of(name).map(|r| &self.rels[r])
    }

    pub fn holds(&self, rel: usize, t: &[Elem]) -> bool {
        self.rels[rel].contains(t)
    }

    pub fn point(&self) -> Option<Elem> {
        self.point
    }

    pub fn with_point(&self, point: Option<Elem>) -> Result<Structure> {
        if let Some(p) = point {
            if p >= self.len() {
                return Err(Error::InvalidStructure("point outside the universe".into()));
            }
        }
        let mut s = self.clone();
        s.point = point;
        Ok(s)
    }

    pub fn with_name(&self, name: impl Into<String>) -> Structure {
        let mut s = self.clone();
        s.name = name.into();
        s
    }

    /// Successors of `e` along binary relation `rel`, in element order.
    pub fn successors(&self, rel: usize, e: Elem) -> Vec<Elem> {
        self.elems().filter(|&f| self.holds(rel, &[e, f])).collect()
    }

    /// Same relational content and point, comparing elements by name.
    pub fn same_up_to_element_order(&self, other: &Structure) -> bool {
        if self.vocab != other.vocab || self.len() != other.len() {
            return false;
        }
        let names: BTreeSet<&String> = self.elems.iter().collect();
        if names != other.elems.iter().collect::<BTreeSet<_>>() {
            return false;
        }
        let pn = |s: &Structure| s.point.map(|p| s.elems[p].clone());
        if pn(self) != pn(other) {
            return false;
        }
        (0..self.vocab.len()).all(|r| {
            let mine: BTreeSet<Vec<&str>> = self.rels[r]
                .tuples
                .iter()
                .map(|t| t.iter().map(|&e| self.elems[e].as_str()).collect())
                .collect();
            let theirs: BTreeSet<Vec<&str>> = other.rels[r]
                .tuples
                .iter()
                .map(|t| t.iter().map(|&e| other.elems[e].as_str()).collect())
                .collect();
            mine == theirs
        })
    }

    /// Total number of tuples over all relations.
    pub fn tuple_count(&self) -> usize {
        self.rels.iter().map(|r| r.len()).sum()
    }
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.vocab == other.vocab
            && self.elems == other.elems
            && self.point == other.point
            && self
                .rels
                .iter()
                .zip(&other.rels)
                .all(|(a, b)| a.tuple_set() == b.tuple_set())
    }
}

impl Eq for Structure {}

/// Incremental construction of a [`Structure`] by element and relation names.
#[derive(Debug, Clone)]
pub struct StructureBuilder {
    name: String,
    vocab: Vocabulary,
    elems: Vec<String>,
    index: HashMap<String, Elem>,
    tuples: Vec<Vec<Vec<Elem>>>,
    point: Option<Elem>,
}

impl StructureBuilder {
    pub fn new(name: impl Into<String>, vocab: Vocabulary) -> Self {
        let tuples = vec![Vec::new(); vocab.len()];
        StructureBuilder {
            name: name.into(),
            vocab,
            elems: Vec::new(),
            index: HashMap::new(),
            tuples,
            point: None,
        }
    }

    /// Adds an element (or returns the existing one with that name).
    pub fn elem(&mut self, name: impl Into<String>) -> Elem {
        let name = name.into();
        if let Some(&e) = self.index.get(&name) {
            return e;
        }
        let e = self.elems.len();
        self.index.insert(name.clone(), e);
        self.elems.push(name);
        e
    }

    pub fn elems<I, S>(&mut self, names: I) -> Vec<Elem>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        names.into_iter().map(|n| self.elem(n)).collect()
    }

    pub fn tuple(&mut self, rel: &str, t: &[Elem]) -> Result<&mut Self> {
        let r = self
            .vocab
            .index_of(rel)
            .ok_or_else(|| Error::InvalidStructure(format!("unknown relation {rel}")))?;
        self.tuples[r].push(t.to_vec());
        Ok(self)
    }

    pub fn point(&mut self, e: Elem) -> &mut Self {
        self.point = Some(e);
        self
    }

    pub fn build(self) -> Result<Structure> {
        Structure::new(self.name, self.vocab, self.elems, self.tuples, self.point)
    }
}

fn check_map(f: &[Elem], a: &Structure, b: &Structure) -> Result<()> {
    if a.vocab != b.vocab {
        return Err(Error::VocabularyMismatch(format!(
            "[{}] vs [{}]",
            a.vocab, b.vocab
        )));
    }
    if f.len() != a.len() {
        return Err(Error::Precondition(format!(
            "map has {} entries but the domain has {} elements",
            f.len(),
            a.len()
        )));
    }
    if f.iter().any(|&e| e >= b.len()) {
        return Err(Error::Precondition("map value outside the codomain".into()));
    }
    Ok(())
}

/// Does `f` preserve every relation (and the point, when both are pointed)?
pub fn is_homomorphism(f: &[Elem], a: &Structure, b: &Structure) -> Result<bool> {
    check_map(f, a, b)?;
    if let (Some(pa), Some(pb)) = (a.point, b.point) {
        if f[pa] != pb {
            return Ok(false);
        }
    }
    let mut image = Vec::new();
    for r in 0..a.vocab.len() {
        for t in a.rels[r].tuples() {
            image.clear();
            image.extend(t.iter().map(|&e| f[e]));
            if !b.holds(r, &image) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Injective homomorphism that also reflects every relation.
pub fn is_embedding(f: &[Elem], a: &Structure, b: &Structure) -> Result<bool> {
    if !is_homomorphism(f, a, b)? {
        return Ok(false);
    }
    let mut preimage: Vec<Option<Elem>> = vec![None; b.len()];
    for (x, &y) in f.iter().enumerate() {
        if preimage[y].is_some() {
            return Ok(false);
        }
        preimage[y] = Some(x);
    }
    for r in 0..b.vocab.len() {
        'tuples: for t in b.rels[r].tuples() {
            let mut pre = Vec::with_capacity(t.len());
            for &y in t {
                match preimage[y] {
                    Some(x) => pre.push(x),
                    None => continue 'tuples,
                }
            }
            if !a.holds(r, &pre) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Undirected graph on the universe: distinct elements co-occurring in a tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaifmanGraph {
    adj: Vec<BTreeSet<Elem>>,
}

impl GaifmanGraph {
    pub fn adjacent(&self, a: Elem, b: Elem) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, a: Elem) -> &BTreeSet<Elem> {
        &self.adj[a]
    }

    /// Each edge once, as `(smaller, larger)`.
    pub fn edges(&self) -> Vec<(Elem, Elem)> {
        let mut out = Vec::new();
        for (a, ns) in self.adj.iter().enumerate() {
            out.extend(ns.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out
    }
}

pub fn gaifman(a: &Structure) -> GaifmanGraph {
    let mut adj = vec![BTreeSet::new(); a.len()];
    for rel in &a.rels {
        for t in rel.tuples() {
            for &x in t {
                for &y in t {
                    if x != y {
                        adj[x].insert(y);
                    }
                }
            }
        }
    }
    GaifmanGraph { adj }
}

/// Adds the binary relation `I`, interpreted as the diagonal.
pub fn expand_equality(a: &Structure) -> Result<Structure> {
    let vocab = a.vocab.with_equality()?;
    let mut tuples = Vec::with_capacity(vocab.len());
    for r in 0..vocab.len() {
        let name = vocab.name(r);
        if name == EQUALITY_SYMBOL {
            tuples.push(a.elems().map(|e| vec![e, e]).collect());
        } else {
            let old = a.vocab.index_of(name).expect("reduct symbol");
            tuples.push(a.rels[old].tuples.clone());
        }
    }
    Structure::new(a.name.clone(), vocab, a.elems.clone(), tuples, a.point)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

/// Quotients the reduct without `I` by the equivalence relation generated
/// by `I`. Each class is named after its first member.
pub fn collapse_equality(a: &Structure) -> Result<Structure> {
    let i_rel = a
        .vocab
        .equality_index()
        .ok_or_else(|| Error::Precondition("vocabulary does not contain the symbol I".into()))?;
    let n = a.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for t in a.rels[i_rel].tuples() {
        let (x, y) = (find(&mut parent, t[0]), find(&mut parent, t[1]));
        if x != y {
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            parent[hi] = lo;
        }
    }
    let mut class_of = vec![usize::MAX; n];
    let mut names = Vec::new();
    let mut rep_class: HashMap<usize, usize> = HashMap::new();
    for e in 0..n {
        let root = find(&mut parent, e);
        let next = rep_class.len();
        let c = *rep_class.entry(root).or_insert_with(|| {
            names.push(a.elems[e].clone());
            next
        });
        class_of[e] = c;
    }
    let vocab = a.vocab.without_equality();
    let mut tuples = Vec::with_capacity(vocab.len());
    for r in 0..vocab.len() {
        let old = a.vocab.index_of(vocab.name(r)).expect("reduct symbol");
        tuples.push(
            a.rels[old]
                .tuples()
                .iter()
                .map(|t| t.iter().map(|&e| class_of[e]).collect())
                .collect(),
        );
    }
    Structure::new(
        a.name.clone(),
        vocab,
        names,
        tuples,
        a.point.map(|p| class_of[p]),
    )
}

/// Brute-force isomorphism test (backtracking over bijections).
pub fn find_isomorphism(a: &Structure, b: &Structure) -> Option<Vec<Elem>> {
    if a.vocab != b.vocab || a.len() != b.len() || a.point.is_some() != b.point.is_some() {
        return None;
    }
    if (0..a.vocab.len()).any(|r| a.rels[r].len() != b.rels[r].len()) {
        return None;
    }
    let n = a.len();
    let mut f = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn consistent(a: &Structure, b: &Structure, f: &[Elem], upto: usize) -> bool {
        // every tuple of `a` among the first `upto` elements maps into `b` and back
        for r in 0..a.vocab.len() {
            for t in a.rels[r].tuples() {
                if t.iter().all(|&e| e < upto) && t.contains(&(upto - 1)) {
                    let img: Vec<Elem> = t.iter().map(|&e| f[e]).collect();
                    if !b.holds(r, &img) {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn go(a: &Structure, b: &Structure, f: &mut Vec<Elem>, used: &mut Vec<bool>, i: usize) -> bool {
        let n = a.len();
        if i == n {
            return true;
        }
        for y in 0..n {
            if used[y] {
                continue;
            }
            if let (Some(pa), Some(pb)) = (a.point, b.point) {
                if (i == pa) != (y == pb) {
                    continue;
                }
            }
            f[i] = y;
            used[y] = true;
            if consistent(a, b, f, i + 1) && go(a, b, f, used, i + 1) {
                return true;
            }
            used[y] = false;
        }
        f[i] = usize::MAX;
        false
    }
    // equal tuple counts plus an injective homomorphism gives an isomorphism
    if go(a, b, &mut f, &mut used, 0) {
        Some(f)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2() -> Vocabulary {
        Vocabulary::new([("E", 2)]).unwrap()
    }

    fn loop_u() -> Structure {
        let mut b = StructureBuilder::new("loop", e2());
        let u = b.elem("u");
        b.tuple("E", &[u, u]).unwrap();
        b.build().unwrap()
    }

    fn edge_vw() -> Structure {
        let mut b = StructureBuilder::new("edge", e2());
        let [v, w] = [b.elem("v"), b.elem("w")];
        b.tuple("E", &[v, w]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn identity_is_hom_and_embedding() {
        let a = edge_vw();
        assert!(is_homomorphism(&[0, 1], &a, &a).unwrap());
        assert!(is_embedding(&[0, 1], &a, &a).unwrap());
    }

    #[test]
    fn edge_collapses_onto_loop() {
        let (edge, lp) = (edge_vw(), loop_u());
        assert!(is_homomorphism(&[0, 0], &edge, &lp).unwrap());
        assert!(!is_embedding(&[0, 0], &edge, &lp).unwrap());
        assert!(!is_homomorphism(&[0], &lp, &edge).unwrap());
    }

    #[test]
    fn induced_substructure_inclusion_is_embedding() {
        let mut b = StructureBuilder::new("path", e2());
        let [x, y, z] = [b.elem("x"), b.elem("y"), b.elem("z")];
        b.tuple("E", &[x, y]).unwrap();
        b.tuple("E", &[y, z]).unwrap();
        let path = b.build().unwrap();
        // induced substructure on {x, y} is the single edge
        assert!(is_embedding(&[0, 1], &edge_vw(), &path).unwrap());
        // {x, z} is not induced by the edge
        assert!(!is_embedding(&[0, 2], &edge_vw(), &path).unwrap());
    }

    #[test]
    fn vocabulary_mismatch_is_an_error() {
        let p = Vocabulary::new([("P", 1)]).unwrap();
        let other = Structure::new("p", p, vec!["a".into()], vec![vec![]], None).unwrap();
        assert!(matches!(
            is_homomorphism(&[0], &loop_u(), &other),
            Err(Error::VocabularyMismatch(_))
        ));
    }

    #[test]
    fn gaifman_examples() {
        assert!(gaifman(&loop_u()).edges().is_empty());
        assert_eq!(gaifman(&edge_vw()).edges(), vec![(0, 1)]);
        let vocab = Vocabulary::new([("E", 2), ("P", 1)]).unwrap();
        let mut b = StructureBuilder::new("m", vocab);
        let [a, bb, c] = [b.elem("a"), b.elem("b"), b.elem("c")];
        b.tuple("E", &[a, bb]).unwrap();
        b.tuple("P", &[c]).unwrap();
        let g = gaifman(&b.build().unwrap());
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert!(g.neighbors(2).is_empty());
    }

    #[test]
    fn expand_and_collapse_equality() {
        let j = expand_equality(&edge_vw()).unwrap();
        let i = j.vocab().equality_index().unwrap();
        assert_eq!(j.relation(i).tuples(), &[vec![0, 0], vec![1, 1]]);
        assert!(expand_equality(&j).is_err());
        let back = collapse_equality(&j).unwrap();
        assert!(find_isomorphism(&back, &edge_vw()).is_some());

        let vocab = e2().with_equality().unwrap();
        let mut b = StructureBuilder::new("q", vocab);
        let [v, w] = [b.elem("v"), b.elem("w")];
        b.tuple("I", &[v, w]).unwrap();
        b.tuple("E", &[v, w]).unwrap();
        let q = collapse_equality(&b.build().unwrap()).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.relation(0).tuples(), &[vec![0, 0]]);
        assert!(collapse_equality(&edge_vw()).is_err());
    }
}
