//! Exhaustive enumeration of small structures up to isomorphism.

use std::collections::HashSet;

use crate::structure::{Elem, Structure, Vocabulary};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn all_tuples(n: usize, arity: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
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

/// Every structure over `vocab` with `0..=max_size` elements, one per
/// isomorphism class. With `pointed`, each has a point (and size ≥ 1).
/// Elements are named `e0, e1, ...`; the point, if any, is `e0`.
pub fn enumerate(vocab: &Vocabulary, max_size: usize, pointed: bool) -> Vec<Structure> {
    let mut out = Vec::new();
    let start = usize::from(pointed);
    for n in start..=max_size {
        let slots: Vec<(usize, Vec<Elem>)> = (0..vocab.len())
            .flat_map(|r| {
                all_tuples(n, vocab.arity(r))
                    .into_iter()
                    .map(move |t| (r, t))
            })
            .collect();
        assert!(
            slots.len() < 32,
            "corpus enumeration limited to fewer than 32 tuple slots"
        );
        let slot_index = |r: usize, t: &[Elem]| {
            slots
                .iter()
                .position(|(r2, t2)| *r2 == r && t2.as_slice() == t)
                .expect("slot")
        };
        // permutations fixing the point at position 0 when pointed
        let perms: Vec<Vec<usize>> = permutations(n)
            .into_iter()
            .filter(|p| !pointed || p[0] == 0)
            .collect();
        let perm_maps: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| {
                slots
                    .iter()
                    .map(|(r, t)| {
                        let img: Vec<Elem> = t.iter().map(|&e| p[e]).collect();
                        slot_index(*r, &img)
                    })
                    .collect()
            })
            .collect();
        let mut seen: HashSet<u32> = HashSet::new();
        for mask in 0u32..(1u32 << slots.len()) {
            let canonical = perm_maps
                .iter()
                .map(|m| {
                    let mut img = 0u32;
                    for (i, &j) in m.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            img |= 1 << j;
                        }
                    }
                    img
                })
                .min()
                .unwrap_or(mask);
            if !seen.insert(canonical) {
                continue;
            }
            let mut tuples = vec![Vec::new(); vocab.len()];
            for (i, (r, t)) in slots.iter().enumerate() {
                if canonical & (1 << i) != 0 {
                    tuples[*r].push(t.clone());
                }
            }
            let name = format!("s{}_{}", n, out.len());
            let elems = (0..n).map(|i| format!("e{i}")).collect();
            let point = if pointed { Some(0) } else { None };
            out.push(Structure::new(name, vocab.clone(), elems, tuples, point).expect("valid"));
        }
    }
    out
}

/// One binary relation `E`, sizes 0 to 3: the 117 directed graphs with loops.
pub fn binary_graphs_up_to(max_size: usize) -> Vec<Structure> {
    enumerate(
        &Vocabulary::new([("E", 2)]).expect("vocab"),
        max_size,
        false,
    )
}

/// Pointed Kripke models with one relation `R` and one proposition `P`.
pub fn pointed_kripke_up_to(max_size: usize) -> Vec<Structure> {
    enumerate(
        &Vocabulary::new([("P", 1), ("R", 2)]).expect("vocab"),
        max_size,
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::find_isomorphism;

    #[test]
    fn graph_counts_match_known_sequence() {
        // directed graphs with loops allowed: 1, 2, 10, 104
        let all = binary_graphs_up_to(3);
        let by_size: Vec<usize> = (0..=3)
            .map(|n| all.iter().filter(|s| s.len() == n).count())
            .collect();
        assert_eq!(by_size, vec![1, 2, 10, 104]);
    }

    #[test]
    fn no_two_enumerated_graphs_are_isomorphic() {
        let all = binary_graphs_up_to(2);
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                assert!(find_isomorphism(a, b).is_none());
            }
        }
    }

    #[test]
    fn pointed_counts() {
        let all = pointed_kripke_up_to(2);
        assert_eq!(all.iter().filter(|s| s.len() == 1).count(), 4);
        assert_eq!(all.iter().filter(|s| s.len() == 2).count(), 64);
    }
}
