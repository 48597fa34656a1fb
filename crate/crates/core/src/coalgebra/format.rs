//! Text format for coalgebras: a structure followed by its forest.
//!
//! ```text
//! vocab E/2 I/2
//! structure EI1(L)
//! elems [u]
//! rel E [u] [u]
//! rel I [u] [u]
//! forest ef 1
//! root [u]
//! ```
//!
//! Every element has exactly one `root` or `parent <child> <parent>` line;
//! pebble coalgebras add `pebble <elem> <index>` for every element.

use crate::coalgebra::{ForestCoalgebra, ForestKind};
use crate::error::{parse_err, Result};
use crate::io::{parse_with_extras, serialize_structure};
use crate::structure::Elem;

pub fn parse_coalgebra(text: &str) -> Result<ForestCoalgebra> {
    let (carrier, extras) = parse_with_extras(text, &["forest", "root", "parent", "pebble"], true)?;
    let n = carrier.len();
    let mut header: Option<(usize, ForestKind, usize)> = None;
    let mut parent: Vec<Option<Option<Elem>>> = vec![None; n];
    let mut pebble: Vec<Option<usize>> = vec![None; n];
    let lookup = |line: usize, name: &str| match carrier.elem_index(name) {
        Some(e) => Ok(e),
        None => parse_err(line, format!("undeclared element {name}")),
    };
    for x in &extras {
        let (line, args) = (x.line, &x.tokens[1..]);
        match x.tokens[0].as_str() {
            "forest" => {
                if header.is_some() {
                    return parse_err(line, "duplicate forest line");
                }
                let [kind, k] = args else {
                    return parse_err(line, "forest takes a kind and a bound");
                };
                let kind: ForestKind = match kind.parse() {
                    Ok(kind) => kind,
                    Err(e) => return parse_err(line, e.to_string()),
                };
                let Ok(k) = k.parse() else {
                    return parse_err(line, format!("invalid bound {k}"));
                };
                header = Some((line, kind, k));
            }
            "root" | "parent" => {
                let expected = if x.tokens[0] == "root" { 1 } else { 2 };
                if args.len() != expected {
                    return parse_err(line, format!("{} takes {expected} element(s)", x.tokens[0]));
                }
                let e = lookup(line, &args[0])?;
                let p = if expected == 2 {
                    Some(lookup(line, &args[1])?)
                } else {
                    None
                };
                if parent[e].replace(p).is_some() {
                    return parse_err(
                        line,
                        format!("{} already has a place in the forest", args[0]),
                    );
                }
            }
            "pebble" => {
                let [e, p] = args else {
                    return parse_err(line, "pebble takes an element and an index");
                };
                let e = lookup(line, e)?;
                let Ok(p) = p.parse() else {
                    return parse_err(line, format!("invalid pebble index {p}"));
                };
                if pebble[e].replace(p).is_some() {
                    return parse_err(line, "duplicate pebble line");
                }
            }
            _ => unreachable!("only registered directives are handed back"),
        }
    }
    let Some((header_line, kind, k)) = header else {
        return parse_err(1, "missing forest line");
    };
    let mut parents = Vec::with_capacity(n);
    for (e, p) in parent.into_iter().enumerate() {
        match p {
            Some(p) => parents.push(p),
            None => {
                return parse_err(
                    header_line,
                    format!(
                        "{} has neither a root nor a parent line",
                        carrier.elem_name(e)
                    ),
                )
            }
        }
    }
    let pebbles = if kind == ForestKind::Pebble {
        let mut ps = Vec::with_capacity(n);
        for (e, p) in pebble.into_iter().enumerate() {
            match p {
                Some(p) => ps.push(p),
                None => {
                    return parse_err(
                        header_line,
                        format!("{} has no pebble line", carrier.elem_name(e)),
                    )
                }
            }
        }
        Some(ps)
    } else {
        if pebble.iter().any(Option::is_some) {
            return parse_err(
                header_line,
                format!("{kind} coalgebras take no pebble lines"),
            );
        }
        None
    };
    ForestCoalgebra::new(kind, carrier, parents, pebbles, k).map_err(|e| {
        crate::error::Error::Parse {
            line: header_line,
            msg: e.to_string(),
        }
    })
}

pub fn serialize_coalgebra(c: &ForestCoalgebra) -> String {
    let mut out = serialize_structure(c.carrier());
    let name = |e: Elem| c.carrier().elem_name(e);
    out.push_str(&format!("forest {} {}\n", c.kind(), c.k()));
    for e in 0..c.len() {
        match c.parent(e) {
            None => out.push_str(&format!("root {}\n", name(e))),
            Some(p) => out.push_str(&format!("parent {} {}\n", name(e), name(p))),
        }
    }
    if let Some(ps) = c.pebbles() {
        for (e, p) in ps.iter().enumerate() {
            out.push_str(&format!("pebble {} {p}\n", name(e)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::{build_ef, build_modal, build_pebble_truncated, DEFAULT_CARRIER_CAP};
    use crate::io::parse_structure;

    #[test]
    fn round_trips() {
        let lp =
            parse_structure("vocab E/2\nstructure L\nelems u v\nrel E u u\nrel E u v").unwrap();
        let pointed = lp.with_point(Some(0)).unwrap();
        let built = [
            build_ef(&lp, 2, true, DEFAULT_CARRIER_CAP)
                .unwrap()
                .into_coalgebra(),
            build_pebble_truncated(&lp, 2, 2, false, DEFAULT_CARRIER_CAP)
                .unwrap()
                .into_coalgebra(),
            build_modal(&pointed, 2, DEFAULT_CARRIER_CAP)
                .unwrap()
                .into_coalgebra(),
        ];
        for c in built {
            let text = serialize_coalgebra(&c);
            let back = parse_coalgebra(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(serialize_coalgebra(&back), text);
        }
    }

    #[test]
    fn rejects_missing_parent() {
        let text = "vocab E/2\nstructure C\nelems a b\nforest ef 2\nroot a\n";
        let err = parse_coalgebra(text).unwrap_err();
        assert!(err.to_string().contains("b has neither"));
        let text = "vocab E/2\nstructure C\nelems a\nforest ef 2\nroot a\npebble a 1\n";
        assert!(parse_coalgebra(text).is_err());
    }
}
