//! Exact preservation oracle based on formula signatures.
//!
//! A formula is represented by the set of assignments (over `A ⊔ B`) that
//! satisfy it. The sets definable in a fragment form a distributive lattice
//! generated by literals and by quantifier (or modal) images of smaller
//! definable sets. We keep only the generators: the lattice is then the
//! family of up-sets of the preorder "every generator containing `u` also
//! contains `v`". Quantifiers distribute over unions (resp. intersections),
//! so it suffices to apply them to principal up-sets `↑v` and to
//! complements of principal down-sets.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::logic::eval::{model_check, Assignment};
use crate::logic::formula::{Formula, Var};
use crate::logic::fragment::{Family, FragmentSpec, Mode};
use crate::structure::{Elem, Structure};

pub const DEFAULT_SIGNATURE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Maximum number of distinct generator signatures (and of table rows).
    pub max_signatures: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            max_signatures: DEFAULT_SIGNATURE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub preserved: bool,
    /// A sentence true in `A` and false in `B`, inside the fragment.
    pub witness: Option<Formula>,
    /// Number of distinct generator signatures computed.
    pub signatures: usize,
}

/// Truth tables of a formula over all total assignments of `x1..xk`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub truth_a: Vec<bool>,
    pub truth_b: Vec<bool>,
    pub free_vars: BTreeSet<Var>,
}

fn all_tuples(n: usize, len: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

fn table(f: &Formula, s: &Structure, k: usize) -> Result<Vec<bool>> {
    all_tuples(s.len(), k)
        .iter()
        .map(|t| model_check(f, s, &Assignment::from_tuple(t)))
        .collect()
}

/// Signature of a first-order formula whose variables are among `x1..xk`.
/// Rows are assignments in lexicographic order.
pub fn signature(f: &Formula, a: &Structure, b: &Structure, k: usize) -> Result<Signature> {
    let free_vars = f.free_vars();
    if let Some(&v) = free_vars.iter().find(|&&v| v as usize > k) {
        return Err(Error::UnboundVariable(v));
    }
    Ok(Signature {
        truth_a: table(f, a, k)?,
        truth_b: table(f, b, k)?,
        free_vars,
    })
}

/// A set of table rows.
trait RowSet: Clone + Eq + std::hash::Hash {
    fn empty(n: usize) -> Self;
    fn insert(&mut self, i: usize);
    fn contains(&self, i: usize) -> bool;
    fn intersect_with(&mut self, other: &Self);
    fn union_with(&mut self, other: &Self);
    fn is_subset(&self, other: &Self) -> bool;
    fn ones(&self) -> Vec<usize>;
    fn count(&self) -> usize;

    fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }
}

impl RowSet for u64 {
    fn empty(_: usize) -> Self {
        0
    }
    fn insert(&mut self, i: usize) {
        *self |= 1 << i;
    }
    fn contains(&self, i: usize) -> bool {
        *self & (1 << i) != 0
    }
    fn intersect_with(&mut self, other: &Self) {
        *self &= *other;
    }
    fn union_with(&mut self, other: &Self) {
        *self |= *other;
    }
    fn is_subset(&self, other: &Self) -> bool {
        *self & !*other == 0
    }
    fn ones(&self) -> Vec<usize> {
        let mut bits = *self;
        let mut out = Vec::with_capacity(bits.count_ones() as usize);
        while bits != 0 {
            out.push(bits.trailing_zeros() as usize);
            bits &= bits - 1;
        }
        out
    }
    fn count(&self) -> usize {
        self.count_ones() as usize
    }
}

impl RowSet for FixedBitSet {
    fn empty(n: usize) -> Self {
        FixedBitSet::with_capacity(n)
    }
    fn insert(&mut self, i: usize) {
        FixedBitSet::insert(self, i)
    }
    fn contains(&self, i: usize) -> bool {
        FixedBitSet::contains(self, i)
    }
    fn intersect_with(&mut self, other: &Self) {
        FixedBitSet::intersect_with(self, other)
    }
    fn union_with(&mut self, other: &Self) {
        FixedBitSet::union_with(self, other)
    }
    fn is_subset(&self, other: &Self) -> bool {
        FixedBitSet::is_subset(self, other)
    }
    fn ones(&self) -> Vec<usize> {
        FixedBitSet::ones(self).collect()
    }
    fn count(&self) -> usize {
        self.count_ones(..)
    }
}

#[derive(Debug, Clone, Copy)]
enum ArgSet {
    /// `↑v`
    Up(usize),
    /// complement of `↓v`
    NotDown(usize),
    All,
    Empty,
}

#[derive(Debug, Clone)]
enum Origin {
    Literal(Formula),
    Op {
        op: usize,
        existential: bool,
        arg: ArgSet,
        limit: usize,
    },
}

#[derive(Debug, Clone)]
enum OpLabel {
    Var(Var),
    Rel(String),
}

/// A quantifier or modality: source point `u` is related to `succ[u]`
/// in the target layer.
struct Op {
    label: OpLabel,
    target: usize,
    succ: Vec<Vec<usize>>,
}

struct Layer<S> {
    points: usize,
    gens: Vec<S>,
    origins: Vec<Origin>,
    index: HashMap<S, usize>,
}

impl<S: RowSet> Layer<S> {
    fn new(points: usize) -> Self {
        Layer {
            points,
            gens: Vec::new(),
            origins: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn add(&mut self, set: S, origin: Origin) -> bool {
        if self.index.contains_key(&set) {
            return false;
        }
        self.index.insert(set.clone(), self.gens.len());
        self.gens.push(set);
        self.origins.push(origin);
        true
    }

    /// `ups[u]` = intersection of the generators containing `u`.
    fn ups(&self) -> Vec<S> {
        let full = S::full(self.points);
        let mut ups = vec![full; self.points];
        for g in &self.gens {
            for u in g.ones() {
                ups[u].intersect_with(g);
            }
        }
        ups
    }
}

fn downs<S: RowSet>(ups: &[S]) -> Vec<S> {
    let n = ups.len();
    let mut downs = vec![S::empty(n); n];
    for (w, up) in ups.iter().enumerate() {
        for v in up.ones() {
            downs[v].insert(w);
        }
    }
    downs
}

struct Engine<S> {
    layers: Vec<Layer<S>>,
    ops: Vec<Op>,
    cap: usize,
    total: usize,
}

impl<S: RowSet> Engine<S> {
    fn add(&mut self, layer: usize, set: S, origin: Origin) -> Result<bool> {
        let added = self.layers[layer].add(set, origin);
        if added {
            self.total += 1;
            if self.total > self.cap {
                return Err(Error::ResourceLimit(format!(
                    "more than {} signatures; raise the cap or shrink the input",
                    self.cap
                )));
            }
        }
        Ok(added)
    }

    /// Images of the current target lattice under `op`. Returns whether
    /// anything new was added to the source layer.
    fn apply_op(&mut self, op: usize, source: usize, universal: bool) -> Result<bool> {
        let target = self.ops[op].target;
        let limit = self.layers[target].gens.len();
        let ups = self.layers[target].ups();
        let downs = downs(&ups);
        let points = self.layers[source].points;
        let mut fresh = Vec::new();
        {
            let succ = &self.ops[op].succ;
            let mut any = S::empty(points);
            let mut none = S::empty(points);
            for u in 0..points {
                if succ[u].is_empty() {
                    none.insert(u);
                } else {
                    any.insert(u);
                }
            }
            fresh.push((
                any,
                Origin::Op {
                    op,
                    existential: true,
                    arg: ArgSet::All,
                    limit,
                },
            ));
            if universal {
                fresh.push((
                    none,
                    Origin::Op {
                        op,
                        existential: false,
                        arg: ArgSet::Empty,
                        limit,
                    },
                ));
            }
            for v in 0..ups.len() {
                let mut ex = S::empty(points);
                for u in 0..points {
                    if succ[u].iter().any(|&s| ups[v].contains(s)) {
                        ex.insert(u);
                    }
                }
                fresh.push((
                    ex,
                    Origin::Op {
                        op,
                        existential: true,
                        arg: ArgSet::Up(v),
                        limit,
                    },
                ));
                if universal {
                    let mut all = S::empty(points);
                    for u in 0..points {
                        if succ[u].iter().all(|&s| !downs[v].contains(s)) {
                            all.insert(u);
                        }
                    }
                    fresh.push((
                        all,
                        Origin::Op {
                            op,
                            existential: false,
                            arg: ArgSet::NotDown(v),
                            limit,
                        },
                    ));
                }
            }
        }
        let mut changed = false;
        for (set, origin) in fresh {
            changed |= self.add(source, set, origin)?;
        }
        Ok(changed)
    }

    fn set_formula(
        &self,
        layer: usize,
        arg: ArgSet,
        limit: usize,
        memo: &mut HashMap<(usize, usize), Formula>,
    ) -> Formula {
        let l = &self.layers[layer];
        match arg {
            ArgSet::All => Formula::True,
            ArgSet::Empty => Formula::False,
            ArgSet::Up(v) => {
                let mut cur = S::full(l.points);
                let mut parts = Vec::new();
                for g in 0..limit {
                    if l.gens[g].contains(v) && !cur.is_subset(&l.gens[g]) {
                        cur.intersect_with(&l.gens[g]);
                        parts.push(self.gen_formula(layer, g, memo));
                    }
                }
                Formula::and(parts)
            }
            ArgSet::NotDown(v) => {
                let mut cur = S::empty(l.points);
                let mut parts = Vec::new();
                for g in 0..limit {
                    if !l.gens[g].contains(v) && !l.gens[g].is_subset(&cur) {
                        cur.union_with(&l.gens[g]);
                        parts.push(self.gen_formula(layer, g, memo));
                    }
                }
                Formula::or(parts)
            }
        }
    }

    fn gen_formula(
        &self,
        layer: usize,
        g: usize,
        memo: &mut HashMap<(usize, usize), Formula>,
    ) -> Formula {
        if let Some(f) = memo.get(&(layer, g)) {
            return f.clone();
        }
        let f = match &self.layers[layer].origins[g] {
            Origin::Literal(f) => f.clone(),
            Origin::Op {
                op,
                existential,
                arg,
                limit,
            } => {
                let op = &self.ops[*op];
                let body = self.set_formula(op.target, *arg, *limit, memo);
                match (&op.label, existential) {
                    (OpLabel::Var(v), true) => Formula::exists(*v, body),
                    (OpLabel::Var(v), false) => Formula::forall(*v, body),
                    (OpLabel::Rel(r), true) => Formula::possibly(r, body),
                    (OpLabel::Rel(r), false) => Formula::necessarily(r, body),
                }
            }
        };
        memo.insert((layer, g), f.clone());
        f
    }

    /// Formula defining the union of `↑u` over `us`.
    fn union_of_ups(
        &self,
        layer: usize,
        us: &[usize],
        memo: &mut HashMap<(usize, usize), Formula>,
    ) -> Formula {
        let l = &self.layers[layer];
        let ups = l.ups();
        let mut cur = S::empty(l.points);
        let mut parts = Vec::new();
        for &u in us {
            if !cur.contains(u) {
                cur.union_with(&ups[u]);
                parts.push(self.set_formula(layer, ArgSet::Up(u), l.gens.len(), memo));
            }
        }
        Formula::or(parts)
    }
}

/// A point of a first-order layer: which structure and which tuple.
#[derive(Clone)]
struct Point {
    side_b: bool,
    tuple: Vec<Elem>,
}

fn points_for(a: &Structure, b: &Structure, len: usize) -> Vec<Point> {
    let mut out: Vec<Point> = all_tuples(a.len(), len)
        .into_iter()
        .map(|tuple| Point {
            side_b: false,
            tuple,
        })
        .collect();
    out.extend(all_tuples(b.len(), len).into_iter().map(|tuple| Point {
        side_b: true,
        tuple,
    }));
    out
}

fn literals(a: &Structure, mode: Mode, vars: usize) -> Vec<Formula> {
    let vocab = a.vocab();
    let mut out = Vec::new();
    for x in 1..=vars as Var {
        for y in x + 1..=vars as Var {
            out.push(Formula::Eq(x, y));
            if mode.allows_negation() {
                out.push(Formula::NegEq(x, y));
            }
        }
    }
    for r in 0..vocab.len() {
        let arity = vocab.arity(r);
        for t in all_tuples(vars, arity) {
            let vs: Vec<Var> = t.iter().map(|&i| i as Var + 1).collect();
            out.push(Formula::atom(vocab.name(r), &vs));
            if mode.allows_negation() {
                out.push(Formula::neg_atom(vocab.name(r), &vs));
            }
        }
    }
    out
}

fn literal_holds(f: &Formula, s: &Structure, t: &[Elem]) -> bool {
    match f {
        Formula::Eq(x, y) => t[*x as usize - 1] == t[*y as usize - 1],
        Formula::NegEq(x, y) => t[*x as usize - 1] != t[*y as usize - 1],
        Formula::Atom(r, vs) | Formula::NegAtom(r, vs) => {
            let rel = s.vocab().index_of(r).expect("literal over the vocabulary");
            let img: Vec<Elem> = vs.iter().map(|&v| t[v as usize - 1]).collect();
            s.holds(rel, &img) == matches!(f, Formula::Atom(..))
        }
        _ => unreachable!("literal"),
    }
}

fn add_literals<S: RowSet>(
    engine: &mut Engine<S>,
    layer: usize,
    pts: &[Point],
    a: &Structure,
    b: &Structure,
    mode: Mode,
    vars: usize,
) -> Result<()> {
    for lit in literals(a, mode, vars) {
        let mut set = S::empty(pts.len());
        for (i, p) in pts.iter().enumerate() {
            let s = if p.side_b { b } else { a };
            if literal_holds(&lit, s, &p.tuple) {
                set.insert(i);
            }
        }
        engine.add(layer, set, Origin::Literal(lit))?;
    }
    Ok(())
}

fn check_rows(rows: usize, cap: usize) -> Result<()> {
    if rows > cap {
        return Err(Error::ResourceLimit(format!(
            "signature tables need {rows} rows (cap {cap})"
        )));
    }
    Ok(())
}

fn rows(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, _| acc.saturating_mul(n))
}

pub fn oracle_preserves(frag: FragmentSpec, a: &Structure, b: &Structure) -> Result<OracleVerdict> {
    oracle_preserves_with(frag, a, b, OracleOptions::default())
}

pub fn oracle_preserves_with(
    frag: FragmentSpec,
    a: &Structure,
    b: &Structure,
    opts: OracleOptions,
) -> Result<OracleVerdict> {
    if a.vocab() != b.vocab() {
        return Err(Error::VocabularyMismatch(format!(
            "[{}] vs [{}]",
            a.vocab(),
            b.vocab()
        )));
    }
    let widest = match frag.family {
        Family::Rank | Family::Variables => {
            rows(a.len(), frag.k).saturating_add(rows(b.len(), frag.k))
        }
        Family::ModalDepth => a.len() + b.len(),
    };
    let verdict = if widest <= 64 {
        dispatch::<u64>(frag, a, b, opts)?
    } else {
        dispatch::<FixedBitSet>(frag, a, b, opts)?
    };
    if let Some(w) = &verdict.witness {
        verify_witness(frag, w, a, b)?;
    }
    Ok(verdict)
}

fn dispatch<S: RowSet>(
    frag: FragmentSpec,
    a: &Structure,
    b: &Structure,
    opts: OracleOptions,
) -> Result<OracleVerdict> {
    match frag.family {
        Family::Rank => by_rank::<S>(frag, a, b, opts),
        Family::Variables => by_variables::<S>(frag, a, b, opts),
        Family::ModalDepth => by_modal_depth::<S>(frag, a, b, opts),
    }
}

fn verify_witness(frag: FragmentSpec, w: &Formula, a: &Structure, b: &Structure) -> Result<()> {
    let c = w.classify();
    let bounded = match frag.family {
        Family::Rank => c.rank <= frag.k,
        Family::Variables => c.var_count <= frag.k,
        Family::ModalDepth => c.modal_depth.is_some_and(|d| d <= frag.k),
    };
    let ok = bounded
        && c.in_mode(frag.mode)
        && (w.has_modal() || w.free_vars().is_empty())
        && model_check(w, a, &Assignment::new())?
        && !model_check(w, b, &Assignment::new())?;
    if ok {
        Ok(())
    } else {
        Err(Error::Internal(format!(
            "oracle witness {w} does not separate the structures"
        )))
    }
}

fn by_rank<S: RowSet>(
    frag: FragmentSpec,
    a: &Structure,
    b: &Structure,
    opts: OracleOptions,
) -> Result<OracleVerdict> {
    let k = frag.k;
    check_rows(
        rows(a.len(), k).saturating_add(rows(b.len(), k)),
        opts.max_signatures,
    )?;
    let layer_points: Vec<Vec<Point>> = (0..=k).map(|i| points_for(a, b, i)).collect();
    let mut engine = Engine {
        layers: layer_points
            .iter()
            .map(|p| Layer::<S>::new(p.len()))
            .collect(),
        ops: Vec::new(),
        cap: opts.max_signatures,
        total: 0,
    };
    // op i: from layer i to layer i+1, binding x_{i+1}
    for i in 0..k {
        let (na, nb) = (a.len(), b.len());
        let a_rows_next = rows(na, i + 1);
        let succ = layer_points[i]
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let (n, base, local) = if p.side_b {
                    (nb, a_rows_next, idx - rows(na, i))
                } else {
                    (na, 0, idx)
                };
                (0..n).map(|e| base + local * n + e).collect()
            })
            .collect();
        engine.ops.push(Op {
            label: OpLabel::Var(i as Var + 1),
            target: i + 1,
            succ,
        });
    }
    for i in (0..=k).rev() {
        add_literals(&mut engine, i, &layer_points[i], a, b, frag.mode, i)?;
        if i < k {
            engine.apply_op(i, i, frag.mode.allows_universal())?;
        }
    }
    // layer 0 has exactly two points: the empty tuple in A, then in B
    let layer0 = &engine.layers[0];
    let witness = (0..layer0.gens.len())
        .find(|&g| layer0.gens[g].contains(0) && !layer0.gens[g].contains(1))
        .map(|g| engine.gen_formula(0, g, &mut HashMap::new()));
    Ok(OracleVerdict {
        preserved: witness.is_none(),
        witness,
        signatures: engine.total,
    })
}

fn by_variables<S: RowSet>(
    frag: FragmentSpec,
    a: &Structure,
    b: &Structure,
    opts: OracleOptions,
) -> Result<OracleVerdict> {
    let k = frag.k;
    match (a.is_empty(), b.is_empty()) {
        (true, true) => {
            return Ok(OracleVerdict {
                preserved: true,
                witness: None,
                signatures: 0,
            })
        }
        (true, false) => {
            let witness = frag
                .mode
                .allows_universal()
                .then(|| Formula::forall(1, Formula::False));
            return Ok(OracleVerdict {
                preserved: witness.is_none(),
                witness,
                signatures: 0,
            });
        }
        (false, true) => {
            let witness = Some(Formula::exists(1, Formula::True));
            return Ok(OracleVerdict {
                preserved: false,
                witness,
                signatures: 0,
            });
        }
        (false, false) => {}
    }
    check_rows(
        rows(a.len(), k).saturating_add(rows(b.len(), k)),
        opts.max_signatures,
    )?;
    let pts = points_for(a, b, k);
    let a_rows = rows(a.len(), k);
    let mut engine = Engine {
        layers: vec![Layer::<S>::new(pts.len())],
        ops: Vec::new(),
        cap: opts.max_signatures,
        total: 0,
    };
    for j in 0..k {
        let succ = pts
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let (n, base, local) = if p.side_b {
                    (b.len(), a_rows, idx - a_rows)
                } else {
                    (a.len(), 0, idx)
                };
                let weight = rows(n, k - 1 - j);
                let digit = p.tuple[j];
                (0..n)
                    .map(|e| base + local - digit * weight + e * weight)
                    .collect()
            })
            .collect();
        engine.ops.push(Op {
            label: OpLabel::Var(j as Var + 1),
            target: 0,
            succ,
        });
    }
    add_literals(&mut engine, 0, &pts, a, b, frag.mode, k)?;
    loop {
        let mut changed = false;
        for j in 0..k {
            changed |= engine.apply_op(j, 0, frag.mode.allows_universal())?;
        }
        if !changed {
            break;
        }
    }
    let layer = &engine.layers[0];
    let ups = layer.ups();
    let a_pts: Vec<usize> = (0..a_rows).collect();
    let reaches_b = |u: usize| ups[u].ones().into_iter().any(|v| v >= a_rows);
    if a_pts.iter().any(|&u| reaches_b(u)) {
        return Ok(OracleVerdict {
            preserved: true,
            witness: None,
            signatures: engine.total,
        });
    }
    let mut memo = HashMap::new();
    let constant = (0..layer.gens.len()).find(|&g| {
        layer.gens[g].count() == a_rows && a_pts.iter().all(|&u| layer.gens[g].contains(u))
    });
    let body = match constant {
        Some(g) => engine.gen_formula(0, g, &mut memo),
        None => engine.union_of_ups(0, &a_pts, &mut memo),
    };
    // the body is constant on each structure; close it off existentially
    let witness = body
        .free_vars()
        .into_iter()
        .rev()
        .fold(body, |f, v| Formula::exists(v, f));
    Ok(OracleVerdict {
        preserved: false,
        witness: Some(witness),
        signatures: engine.total,
    })
}

fn by_modal_depth<S: RowSet>(
    frag: FragmentSpec,
    a: &Structure,
    b: &Structure,
    opts: OracleOptions,
) -> Result<OracleVerdict> {
    if !a.vocab().is_modal() {
        return Err(Error::NonModalVocabulary);
    }
    let (Some(pa), Some(pb)) = (a.point(), b.point()) else {
        return Err(Error::MissingPoint);
    };
    check_rows(a.len() + b.len(), opts.max_signatures)?;
    let k = frag.k;
    let n = a.len() + b.len();
    let vocab = a.vocab();
    let world = |u: usize| {
        if u < a.len() {
            (a, u)
        } else {
            (b, u - a.len())
        }
    };
    let mut engine = Engine {
        layers: (0..=k).map(|_| Layer::new(n)).collect(),
        ops: Vec::new(),
        cap: opts.max_signatures,
        total: 0,
    };
    // ops for depth d (d = 1..=k) over each binary relation, targeting layer d-1
    let binaries: Vec<usize> = vocab.of_arity(2).collect();
    for d in 1..=k {
        for &r in &binaries {
            let succ = (0..n)
                .map(|u| {
                    let (s, w) = world(u);
                    let base = if u < a.len() { 0 } else { a.len() };
                    s.successors(r, w).into_iter().map(|v| base + v).collect()
                })
                .collect();
            engine.ops.push(Op {
                label: OpLabel::Rel(vocab.name(r).to_string()),
                target: d - 1,
                succ,
            });
        }
    }
    for d in 0..=k {
        for p in vocab.of_arity(1) {
            let name = vocab.name(p);
            let mut pos = S::empty(n);
            for u in 0..n {
                let (s, w) = world(u);
                if s.holds(p, &[w]) {
                    pos.insert(u);
                }
            }
            let mut neg = S::empty(n);
            for u in 0..n {
                if !pos.contains(u) {
                    neg.insert(u);
                }
            }
            engine.add(d, pos, Origin::Literal(Formula::Prop(name.to_string())))?;
            if frag.mode.allows_negation() {
                engine.add(d, neg, Origin::Literal(Formula::NegProp(name.to_string())))?;
            }
        }
        if d > 0 {
            for i in 0..binaries.len() {
                engine.apply_op(
                    (d - 1) * binaries.len() + i,
                    d,
                    frag.mode.allows_universal(),
                )?;
            }
        }
    }
    let top = &engine.layers[k];
    let (ia, ib) = (pa, a.len() + pb);
    let witness = (0..top.gens.len())
        .find(|&g| top.gens[g].contains(ia) && !top.gens[g].contains(ib))
        .map(|g| engine.gen_formula(k, g, &mut HashMap::new()));
    Ok(OracleVerdict {
        preserved: witness.is_none(),
        witness,
        signatures: engine.total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_structure;

    fn s(text: &str) -> Structure {
        parse_structure(text).unwrap()
    }

    fn edge() -> Structure {
        s("vocab E/2\nstructure D\nelems v w\nrel E v w")
    }

    fn lp() -> Structure {
        s("vocab E/2\nstructure L\nelems u\nrel E u u")
    }

    fn spec(family: Family, k: usize, mode: Mode) -> FragmentSpec {
        FragmentSpec::new(family, k, mode).unwrap()
    }

    #[test]
    fn edge_to_loop() {
        let ep = oracle_preserves(
            spec(Family::Rank, 2, Mode::ExistentialPositive),
            &edge(),
            &lp(),
        )
        .unwrap();
        assert!(ep.preserved);
        let ex =
            oracle_preserves(spec(Family::Rank, 2, Mode::Existential), &edge(), &lp()).unwrap();
        assert!(!ex.preserved);
        let w = ex.witness.unwrap();
        assert!(model_check(&w, &edge(), &Assignment::new()).unwrap());
        assert!(!model_check(&w, &lp(), &Assignment::new()).unwrap());
    }

    #[test]
    fn identical_structures_are_preserved() {
        for mode in Mode::ALL {
            for family in [Family::Rank, Family::Variables] {
                assert!(
                    oracle_preserves(spec(family, 2, mode), &edge(), &edge())
                        .unwrap()
                        .preserved
                );
            }
        }
    }

    #[test]
    fn positive_monotone_under_added_tuples() {
        let bare = s("vocab E/2\nstructure P\nelems p");
        let looped = s("vocab E/2\nstructure Q\nelems q\nrel E q q");
        for k in 1..=3 {
            assert!(
                oracle_preserves(spec(Family::Rank, k, Mode::Positive), &bare, &looped)
                    .unwrap()
                    .preserved
            );
            assert!(
                !oracle_preserves(spec(Family::Rank, k, Mode::Positive), &looped, &bare)
                    .unwrap()
                    .preserved
            );
        }
    }

    #[test]
    fn empty_structures() {
        let empty = s("vocab E/2\nstructure Z");
        for mode in Mode::ALL {
            for family in [Family::Rank, Family::Variables] {
                let f = spec(family, 1, mode);
                let forward = oracle_preserves(f, &empty, &lp()).unwrap().preserved;
                assert_eq!(forward, !mode.allows_universal(), "{family} {mode}");
                assert!(!oracle_preserves(f, &lp(), &empty).unwrap().preserved);
                assert!(oracle_preserves(f, &empty, &empty).unwrap().preserved);
            }
        }
    }

    #[test]
    fn variable_fragment_on_cliques() {
        let clique = |n: usize| {
            let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
            let mut text = format!("vocab E/2\nstructure K{n}\nelems {}\n", names.join(" "));
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        text.push_str(&format!("rel E c{i} c{j}\n"));
                    }
                }
            }
            s(&text)
        };
        let f2 = spec(Family::Variables, 2, Mode::Full);
        assert!(
            oracle_preserves(f2, &clique(2), &clique(3))
                .unwrap()
                .preserved
        );
        assert!(
            oracle_preserves(f2, &clique(3), &clique(2))
                .unwrap()
                .preserved
        );
        let f3 = spec(Family::Variables, 3, Mode::Full);
        assert!(
            !oracle_preserves(f3, &clique(3), &clique(2))
                .unwrap()
                .preserved
        );
    }

    #[test]
    fn modal_successor() {
        let a = s("vocab P/1 R/2\nstructure A\nelems a c\nrel R a c\npoint a");
        let b = s("vocab P/1 R/2\nstructure B\nelems b\npoint b");
        let v = oracle_preserves(spec(Family::ModalDepth, 1, Mode::Existential), &a, &b).unwrap();
        assert_eq!(v.witness, Some(Formula::possibly("R", Formula::True)));
        assert!(
            oracle_preserves(spec(Family::ModalDepth, 1, Mode::Existential), &b, &a)
                .unwrap()
                .preserved
        );
        // the box "no successor" is positive but not existential
        assert!(
            !oracle_preserves(spec(Family::ModalDepth, 1, Mode::Positive), &b, &a)
                .unwrap()
                .preserved
        );
    }

    #[test]
    fn resource_cap_is_reported() {
        let opts = OracleOptions { max_signatures: 3 };
        let r = oracle_preserves_with(spec(Family::Rank, 2, Mode::Full), &edge(), &lp(), opts);
        assert!(matches!(r, Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn signature_depends_only_on_free_variables() {
        let f = parse_formula_ok("E x2. E(x1,x2)");
        let sig = signature(&f, &edge(), &lp(), 2).unwrap();
        assert_eq!(sig.free_vars.iter().copied().collect::<Vec<_>>(), vec![1]);
        // rows (x1, x2) lexicographic; x2 must not matter
        assert_eq!(sig.truth_a, vec![true, true, false, false]);
        assert_eq!(sig.truth_b, vec![true]);
    }

    fn parse_formula_ok(s: &str) -> Formula {
        crate::logic::formula::parse_formula(s).unwrap()
    }
}
