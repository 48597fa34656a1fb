//! Path trees: the embedded paths of a coalgebra ordered by inclusion.

use std::collections::HashMap;

use crate::coalgebra::morphism::is_coalgebra_morphism;
use crate::coalgebra::ForestCoalgebra;
use crate::error::{Error, Result};
use crate::structure::Elem;

/// Node 0 is the empty path `⊥`; every other node is a down-closed chain
/// of the coalgebra, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTree {
    nodes: Vec<Vec<Elem>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    index: HashMap<Vec<Elem>, usize>,
}

impl PathTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &[Elem] {
        &self.nodes[i]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn lookup(&self, chain: &[Elem]) -> Option<usize> {
        let mut key = chain.to_vec();
        key.sort_unstable();
        self.index.get(&key).copied()
    }

    /// `i ≤ j`: the path `i` is contained in the path `j`.
    pub fn leq(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.nodes[i], &self.nodes[j]);
        a.iter().all(|e| b.binary_search(e).is_ok())
    }

    /// If sending each non-root path to its deepest element is an order
    /// isomorphism onto the forest of `x`, returns that map (node 0 omitted).
    pub fn forest_isomorphism(&self, x: &ForestCoalgebra) -> Option<Vec<Elem>> {
        let tops: Vec<Elem> = self.nodes[1..]
            .iter()
            .map(|s| {
                *s.iter()
                    .max_by_key(|&&e| x.depth(e))
                    .expect("non-empty path")
            })
            .collect();
        let mut seen = vec![false; x.len()];
        for &t in &tops {
            if std::mem::replace(&mut seen[t], true) {
                return None;
            }
        }
        if tops.len() != x.len() {
            return None;
        }
        for i in 0..tops.len() {
            for j in 0..tops.len() {
                if self.leq(i + 1, j + 1) != x.leq(tops[i], tops[j]) {
                    return None;
                }
            }
        }
        Some(tops)
    }
}

/// Enumerates the down-closed chains of `x` by one-element extensions.
pub fn path_tree(x: &ForestCoalgebra) -> PathTree {
    let n = x.len();
    let below: Vec<Vec<Elem>> = (0..n)
        .map(|e| (0..n).filter(|&z| z != e && x.leq(z, e)).collect())
        .collect();
    let mut tree = PathTree {
        nodes: vec![Vec::new()],
        parent: vec![None],
        children: vec![Vec::new()],
        index: HashMap::new(),
    };
    tree.index.insert(Vec::new(), 0);
    let mut i = 0;
    while i < tree.nodes.len() {
        let current = tree.nodes[i].clone();
        for e in 0..n {
            if current.binary_search(&e).is_ok() {
                continue;
            }
            let extends = below[e].len() == current.len()
                && below[e].iter().all(|z| current.binary_search(z).is_ok());
            if !extends {
                continue;
            }
            let mut next = current.clone();
            next.push(e);
            next.sort_unstable();
            if tree.index.contains_key(&next) {
                continue;
            }
            let id = tree.nodes.len();
            tree.index.insert(next.clone(), id);
            tree.nodes.push(next);
            tree.parent.push(Some(i));
            tree.children.push(Vec::new());
            tree.children[i].push(id);
        }
        i += 1;
    }
    tree
}

/// The action of a coalgebra morphism on paths: each path goes to its image.
pub fn path_map(
    x: &ForestCoalgebra,
    y: &ForestCoalgebra,
    f: &[Elem],
) -> Result<(PathTree, PathTree, Vec<usize>)> {
    if !is_coalgebra_morphism(x, y, f) {
        return Err(Error::NotForestMorphism(
            "paths are only transported along coalgebra morphisms".into(),
        ));
    }
    let (px, py) = (path_tree(x), path_tree(y));
    let mut map = Vec::with_capacity(px.len());
    for i in 0..px.len() {
        let image: Vec<Elem> = px.node(i).iter().map(|&e| f[e]).collect();
        let j = py
            .lookup(&image)
            .ok_or_else(|| Error::NotForestMorphism("image of a path is not a path".into()))?;
        map.push(j);
    }
    Ok((px, py, map))
}

fn require_tree_morphism(s: &PathTree, t: &PathTree, map: &[usize]) -> Result<()> {
    if map.len() != s.len() || map.iter().any(|&j| j >= t.len()) {
        return Err(Error::NotForestMorphism(
            "map does not cover the path tree".into(),
        ));
    }
    if map[0] != 0 {
        return Err(Error::NotForestMorphism(
            "the empty path must go to the empty path".into(),
        ));
    }
    for i in 1..s.len() {
        let p = s.parent(i).expect("non-root");
        if t.parent(map[i]) != Some(map[p]) {
            return Err(Error::NotForestMorphism(format!(
                "cover above node {p} is not preserved"
            )));
        }
    }
    Ok(())
}

/// Root preservation and cover lifting for a map of path trees.
pub fn is_p_morphism(s: &PathTree, t: &PathTree, map: &[usize]) -> Result<bool> {
    require_tree_morphism(s, t, map)?;
    Ok((0..s.len()).all(|i| {
        t.children(map[i])
            .iter()
            .all(|&c| s.children(i).iter().any(|&d| map[d] == c))
    }))
}

/// A morphism is a quotient exactly when it is surjective on paths.
pub fn is_quotient(s: &PathTree, t: &PathTree, map: &[usize]) -> Result<bool> {
    require_tree_morphism(s, t, map)?;
    let mut hit = vec![false; t.len()];
    for &j in map {
        hit[j] = true;
    }
    Ok(hit.into_iter().all(|h| h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::{build_ef, build_modal, ForestKind, DEFAULT_CARRIER_CAP};
    use crate::io::parse_structure;

    #[test]
    fn edge_depth_one() {
        let edge = parse_structure("vocab E/2\nstructure D\nelems v w\nrel E v w").unwrap();
        let c = build_ef(&edge, 1, false, DEFAULT_CARRIER_CAP).unwrap();
        let t = path_tree(c.coalgebra());
        assert_eq!(t.len(), 3);
        assert_eq!(t.children(0).len(), 2);
        assert!(t.forest_isomorphism(c.coalgebra()).is_some());
        let id: Vec<usize> = (0..t.len()).collect();
        assert!(is_p_morphism(&t, &t, &id).unwrap());
    }

    #[test]
    fn modal_tree_matches() {
        let m = parse_structure(
            "vocab R/2\nstructure M\nelems a b c\nrel R a b\nrel R a c\nrel R b c\npoint a",
        )
        .unwrap();
        let c = build_modal(&m, 2, DEFAULT_CARRIER_CAP).unwrap();
        let t = path_tree(c.coalgebra());
        assert_eq!(t.len(), c.coalgebra().len() + 1);
        assert!(t.forest_isomorphism(c.coalgebra()).is_some());
    }

    #[test]
    fn collapse_is_not_a_tree_morphism() {
        let s = parse_structure("vocab E/2\nstructure C\nelems v w").unwrap();
        let chain = ForestCoalgebra::new(ForestKind::Ef, s, vec![None, Some(0)], None, 2).unwrap();
        let t = path_tree(&chain);
        assert!(is_p_morphism(&t, &t, &[0, 1, 1]).is_err());
        assert!(is_p_morphism(&t, &t, &[0, 0, 0]).is_err());
        assert!(is_quotient(&t, &t, &[0, 1, 2]).unwrap());
    }
}
