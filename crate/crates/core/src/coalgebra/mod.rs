//! Forest-ordered structures: the coalgebras of the Ehrenfeucht-Fraïssé,
//! pebbling and modal comonads, and the morphisms between them.

mod bisim;
mod build;
mod format;
mod laws;
mod morphism;
mod path;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::structure::{gaifman, Elem, Structure};

pub use bisim::{
    bisim_from, build_bisim, build_positive_bisim, positive_bisim_from, system_from_span,
    system_from_witness, verify_bisim, verify_positive_bisim, BisimCheck, BisimOutcome,
    PositiveBisimOutcome, PositiveBisimWitness, Span,
};
pub use build::{
    build_ef, build_modal, build_pebble_truncated, coextend, Cofree, Step, DEFAULT_CARRIER_CAP,
};
pub use format::{parse_coalgebra, serialize_coalgebra};
pub use laws::{check_laws, random_homomorphism, LawReport};
pub use morphism::{
    check_morphism, factor_xo, find_morphism, is_open_by_squares, open_violation, Factorization,
    MorphismKind, MorphismTag, MorphismWitness,
};
pub use path::{is_p_morphism, is_quotient, path_map, path_tree, PathTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ForestKind {
    Ef,
    Pebble,
    Modal,
}

impl ForestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ForestKind::Ef => "ef",
            ForestKind::Pebble => "pebble",
            ForestKind::Modal => "modal",
        }
    }
}

impl fmt::Display for ForestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ForestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ef" => Ok(ForestKind::Ef),
            "pebble" => Ok(ForestKind::Pebble),
            "modal" => Ok(ForestKind::Modal),
            _ => Err(Error::Precondition(format!("unknown coalgebra kind {s}"))),
        }
    }
}

/// A violated coalgebra condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalgebraViolation {
    pub condition: &'static str,
    pub detail: String,
}

impl fmt::Display for CoalgebraViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) violated: {}", self.condition, self.detail)
    }
}

/// A structure with a forest order given by its parent map.
///
/// Depths start at 1 for roots. Pebble indices are 1-based.
#[derive(Debug, Clone)]
pub struct ForestCoalgebra {
    kind: ForestKind,
    carrier: Structure,
    parent: Vec<Option<Elem>>,
    pebble: Option<Vec<usize>>,
    k: usize,
    children: Vec<Vec<Elem>>,
    roots: Vec<Elem>,
    /// `chains[x]` lists `↓x` from the root down to `x`.
    chains: Vec<Vec<Elem>>,
    /// Tuples lying on a single branch, filed under their deepest element.
    tuples_at: Vec<Vec<(usize, Vec<Elem>)>>,
    /// Tuples whose elements are not pairwise comparable.
    stray: Vec<(usize, Vec<Elem>)>,
}

impl PartialEq for ForestCoalgebra {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.k == other.k
            && self.carrier == other.carrier
            && self.parent == other.parent
            && self.pebble == other.pebble
    }
}

impl Eq for ForestCoalgebra {}

impl ForestCoalgebra {
    /// Checks that `parent` describes a forest; the remaining coalgebra
    /// conditions are reported by [`ForestCoalgebra::validate`].
    pub fn new(
        kind: ForestKind,
        carrier: Structure,
        parent: Vec<Option<Elem>>,
        pebble: Option<Vec<usize>>,
        k: usize,
    ) -> Result<Self> {
        let n = carrier.len();
        if parent.len() != n {
            return Err(Error::InvalidCoalgebra(format!(
                "parent map has {} entries for {n} elements",
                parent.len()
            )));
        }
        if let Some(&bad) = parent.iter().flatten().find(|&&p| p >= n) {
            return Err(Error::InvalidCoalgebra(format!(
                "parent index {bad} out of range"
            )));
        }
        match (&pebble, kind) {
            (Some(p), ForestKind::Pebble) if p.len() != n => {
                return Err(Error::InvalidCoalgebra(
                    "pebble map does not cover the universe".into(),
                ))
            }
            (None, ForestKind::Pebble) => {
                return Err(Error::InvalidCoalgebra(
                    "pebble kind needs a pebble map".into(),
                ))
            }
            (Some(_), ForestKind::Ef | ForestKind::Modal) => {
                return Err(Error::InvalidCoalgebra(format!(
                    "{kind} coalgebras carry no pebble map"
                )))
            }
            _ => {}
        }
        let mut chains: Vec<Option<Vec<Elem>>> = vec![None; n];
        for x in 0..n {
            let mut path = vec![x];
            let mut cur = x;
            while let Some(p) = parent[cur] {
                if path.len() > n {
                    return Err(Error::InvalidCoalgebra(format!(
                        "parent map has a cycle through {}",
                        carrier.elem_name(x)
                    )));
                }
                if let Some(c) = &chains[p] {
                    let mut full = c.clone();
                    full.extend(path.iter().rev());
                    path = full;
                    cur = usize::MAX;
                    break;
                }
                path.push(p);
                cur = p;
            }
            if cur != usize::MAX {
                path.reverse();
            }
            chains[x] = Some(path);
        }
        let chains: Vec<Vec<Elem>> = chains.into_iter().map(|c| c.expect("filled")).collect();
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for x in 0..n {
            match parent[x] {
                Some(p) => children[p].push(x),
                None => roots.push(x),
            }
        }
        let mut c = ForestCoalgebra {
            kind,
            carrier,
            parent,
            pebble,
            k,
            children,
            roots,
            chains,
            tuples_at: vec![Vec::new(); n],
            stray: Vec::new(),
        };
        for r in 0..c.carrier.vocab().len() {
            for t in c.carrier.relation(r).tuples() {
                let top = *t
                    .iter()
                    .max_by_key(|&&e| c.depth(e))
                    .expect("arity is positive");
                if t.iter().all(|&e| c.leq(e, top)) {
                    c.tuples_at[top].push((r, t.clone()));
                } else {
                    c.stray.push((r, t.clone()));
                }
            }
        }
        Ok(c)
    }

    pub fn kind(&self) -> ForestKind {
        self.kind
    }

    pub fn carrier(&self) -> &Structure {
        &self.carrier
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    /// Rounds for EF and modal kinds, pebbles for the pebble kind.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parent(&self, x: Elem) -> Option<Elem> {
        self.parent[x]
    }

    pub fn parents(&self) -> &[Option<Elem>] {
        &self.parent
    }

    pub fn pebble(&self, x: Elem) -> Option<usize> {
        self.pebble.as_ref().map(|p| p[x])
    }

    pub fn pebbles(&self) -> Option<&[usize]> {
        self.pebble.as_deref()
    }

    pub fn children(&self, x: Elem) -> &[Elem] {
        &self.children[x]
    }

    pub fn roots(&self) -> &[Elem] {
        &self.roots
    }

    /// The distinguished point (the root of a modal coalgebra).
    pub fn root_point(&self) -> Option<Elem> {
        self.carrier.point()
    }

    pub fn depth(&self, x: Elem) -> usize {
        self.chains[x].len()
    }

    pub fn chain(&self, x: Elem) -> &[Elem] {
        &self.chains[x]
    }

    /// `x ≤ y` in the forest order.
    pub fn leq(&self, x: Elem, y: Elem) -> bool {
        let d = self.depth(x);
        d <= self.depth(y) && self.chains[y][d - 1] == x
    }

    pub fn comparable(&self, x: Elem, y: Elem) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }

    /// Largest depth, 0 when empty.
    pub fn height(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Elements sorted by depth (parents before children).
    pub fn by_depth(&self) -> Vec<Elem> {
        let mut order: Vec<Elem> = (0..self.len()).collect();
        order.sort_by_key(|&x| self.depth(x));
        order
    }

    pub(crate) fn tuples_at(&self, x: Elem) -> &[(usize, Vec<Elem>)] {
        &self.tuples_at[x]
    }

    /// The unique binary relation labelling the cover `parent(x) ⋖ x`.
    pub fn cover_label(&self, x: Elem) -> Option<usize> {
        let p = self.parent[x]?;
        let mut found = None;
        for r in self.carrier.vocab().of_arity(2) {
            if self.carrier.holds(r, &[p, x]) {
                if found.is_some() {
                    return None;
                }
                found = Some(r);
            }
        }
        found
    }

    fn names(&self, t: &[Elem]) -> String {
        t.iter()
            .map(|&e| self.carrier.elem_name(e))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Every violated coalgebra condition, each with a witness.
    pub fn validate(&self) -> Vec<CoalgebraViolation> {
        let mut out = Vec::new();
        let name = |e: Elem| self.carrier.elem_name(e).to_string();
        let bound = match self.kind {
            ForestKind::Ef => Some(self.k),
            ForestKind::Modal => Some(self.k + 1),
            ForestKind::Pebble => None,
        };
        if let Some(bound) = bound {
            for x in 0..self.len() {
                if self.depth(x) > bound {
                    out.push(CoalgebraViolation {
                        condition: "height",
                        detail: format!(
                            "{} lies at depth {} beyond the bound {}",
                            name(x),
                            self.depth(x),
                            bound
                        ),
                    });
                }
            }
        }
        for (a, b) in gaifman(&self.carrier).edges() {
            if !self.comparable(a, b) {
                out.push(CoalgebraViolation {
                    condition: "E-bis",
                    detail: format!(
                        "({},{}) adjacent but on different branches",
                        name(a),
                        name(b)
                    ),
                });
            }
        }
        if let Some(peb) = &self.pebble {
            for x in 0..self.len() {
                if peb[x] == 0 || peb[x] > self.k {
                    out.push(CoalgebraViolation {
                        condition: "pebble",
                        detail: format!(
                            "{} carries pebble {} outside 1..{}",
                            name(x),
                            peb[x],
                            self.k
                        ),
                    });
                }
            }
            for (a, b) in gaifman(&self.carrier).edges() {
                let (lo, hi) = if self.leq(a, b) {
                    (a, b)
                } else if self.leq(b, a) {
                    (b, a)
                } else {
                    continue;
                };
                let chain = &self.chains[hi];
                if let Some(&x) = chain[self.depth(lo)..].iter().find(|&&x| peb[x] == peb[lo]) {
                    out.push(CoalgebraViolation {
                        condition: "P-bis",
                        detail: format!(
                            "({},{}) adjacent but pebble {} is reused at {}",
                            name(lo),
                            name(hi),
                            peb[lo],
                            name(x)
                        ),
                    });
                }
            }
        }
        if self.kind == ForestKind::Modal {
            out.extend(self.modal_violations());
        }
        out
    }

    fn modal_violations(&self) -> Vec<CoalgebraViolation> {
        let mut out = Vec::new();
        let v = |detail: String| CoalgebraViolation {
            condition: "M-bis",
            detail,
        };
        let vocab = self.carrier.vocab();
        if !vocab.is_modal() {
            out.push(v("vocabulary has a relation of arity above 2".into()));
            return out;
        }
        match (self.roots.as_slice(), self.carrier.point()) {
            ([r], Some(p)) if *r == p => {}
            (_, None) => out.push(v("no distinguished point".into())),
            (roots, Some(p)) => out.push(v(format!(
                "roots [{}] differ from the point {}",
                self.names(roots),
                self.carrier.elem_name(p)
            ))),
        }
        for r in vocab.of_arity(2) {
            for t in self.carrier.relation(r).tuples() {
                if self.parent[t[1]] != Some(t[0]) {
                    out.push(v(format!(
                        "{}({}) does not follow a cover",
                        vocab.name(r),
                        self.names(t)
                    )));
                }
            }
        }
        for x in 0..self.len() {
            let Some(p) = self.parent[x] else { continue };
            let labels: Vec<&str> = vocab
                .of_arity(2)
                .filter(|&r| self.carrier.holds(r, &[p, x]))
                .map(|r| vocab.name(r))
                .collect();
            if labels.len() != 1 {
                out.push(v(format!(
                    "cover ({}) carries {} relations [{}] instead of one",
                    self.names(&[p, x]),
                    labels.len(),
                    labels.join(",")
                )));
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub(crate) fn require_valid(&self, role: &str) -> Result<()> {
        match self.validate().first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidCoalgebra(format!("{role}: {v}"))),
        }
    }

    /// The same forest with a different carrier (same universe and order).
    pub fn with_carrier(&self, carrier: Structure) -> Result<Self> {
        if carrier.len() != self.len() {
            return Err(Error::InvalidCoalgebra("carrier size changed".into()));
        }
        ForestCoalgebra::new(
            self.kind,
            carrier,
            self.parent.clone(),
            self.pebble.clone(),
            self.k,
        )
    }
}

/// Does the chain map `↓x → ↓y` (matching elements by depth) preserve the
/// tuples of `X` sitting at `x`, and, with `reflect`, those of `Y` at `y`?
/// Pebble indices of `x` and `y` must agree.
pub(crate) fn local_ok(
    x: &ForestCoalgebra,
    xe: Elem,
    y: &ForestCoalgebra,
    ye: Elem,
    reflect: bool,
) -> bool {
    if x.depth(xe) != y.depth(ye) || x.pebble(xe) != y.pebble(ye) {
        return false;
    }
    let (cx, cy) = (x.chain(xe), y.chain(ye));
    let mut image = Vec::new();
    for (r, t) in x.tuples_at(xe) {
        image.clear();
        image.extend(t.iter().map(|&e| cy[x.depth(e) - 1]));
        if !y.carrier().holds(*r, &image) {
            return false;
        }
    }
    if reflect {
        for (r, t) in y.tuples_at(ye) {
            image.clear();
            image.extend(t.iter().map(|&e| cx[y.depth(e) - 1]));
            if !x.carrier().holds(*r, &image) {
                return false;
            }
        }
    }
    true
}

pub(crate) fn require_compatible(x: &ForestCoalgebra, y: &ForestCoalgebra) -> Result<()> {
    if x.kind() != y.kind() {
        return Err(Error::KindMismatch(format!(
            "{} coalgebra against {} coalgebra",
            x.kind(),
            y.kind()
        )));
    }
    if x.carrier().vocab() != y.carrier().vocab() {
        return Err(Error::VocabularyMismatch(format!(
            "{} vs {}",
            x.carrier().vocab(),
            y.carrier().vocab()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_structure;

    #[test]
    fn edge_across_roots_violates_e_bis() {
        let s = parse_structure("vocab E/2\nstructure D\nelems v w\nrel E v w").unwrap();
        let c = ForestCoalgebra::new(ForestKind::Ef, s, vec![None, None], None, 2).unwrap();
        let v = c.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].condition, "E-bis");
        assert!(v[0].detail.contains("(v,w)"));
    }

    #[test]
    fn cycle_rejected() {
        let s = parse_structure("vocab E/2\nstructure D\nelems v w").unwrap();
        assert!(ForestCoalgebra::new(ForestKind::Ef, s, vec![Some(1), Some(0)], None, 2).is_err());
    }

    #[test]
    fn modal_double_label() {
        let s =
            parse_structure("vocab R/2 S/2\nstructure M\nelems x y\nrel R x y\nrel S x y\npoint x")
                .unwrap();
        let c = ForestCoalgebra::new(ForestKind::Modal, s, vec![None, Some(0)], None, 1).unwrap();
        let v = c.validate();
        assert!(v
            .iter()
            .any(|v| v.condition == "M-bis" && v.detail.contains("2 relations")));
    }

    #[test]
    fn order_queries() {
        let s = parse_structure("vocab E/2\nstructure C\nelems a b c d").unwrap();
        let c = ForestCoalgebra::new(
            ForestKind::Ef,
            s,
            vec![None, Some(0), Some(1), Some(0)],
            None,
            3,
        )
        .unwrap();
        assert!(c.leq(0, 2) && c.leq(1, 2) && !c.leq(3, 2) && !c.comparable(2, 3));
        assert_eq!(c.chain(2), &[0, 1, 2]);
        assert_eq!(c.height(), 3);
        assert_eq!(c.children(0), &[1, 3]);
    }
}
