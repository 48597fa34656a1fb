//! Line-oriented text format for structures.
//!
//! ```text
//! vocab E/2 P/1
//! structure A
//! elems u v
//! rel E u v
//! rel P v
//! point u
//! ```

use crate::error::{parse_err, Error, Result};
use crate::structure::{Elem, Structure, Vocabulary, EQUALITY_SYMBOL};

/// A non-structure line left for a caller that extends the grammar.
#[derive(Debug, Clone)]
pub(crate) struct ExtraLine {
    pub line: usize,
    pub tokens: Vec<String>,
}

fn tokenize(text: &str) -> Vec<(usize, Vec<String>)> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens: Vec<String> = body.split_whitespace().map(str::to_string).collect();
        if !tokens.is_empty() {
            out.push((i + 1, tokens));
        }
    }
    out
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn parse_vocab(line: usize, tokens: &[String], allow_equality: bool) -> Result<Vocabulary> {
    let mut rels: Vec<(String, usize)> = Vec::new();
    for tok in tokens {
        let Some((name, arity)) = tok.split_once('/') else {
            return parse_err(line, format!("expected <name>/<arity>, found {tok}"));
        };
        if !is_identifier(name) {
            return parse_err(line, format!("invalid relation name {name}"));
        }
        let arity: usize = match arity.parse() {
            Ok(a) => a,
            Err(_) => return parse_err(line, format!("invalid arity in {tok}")),
        };
        if arity == 0 {
            return parse_err(line, format!("relation {name} has arity 0"));
        }
        if name == EQUALITY_SYMBOL && !allow_equality {
            return parse_err(line, "the relation symbol I is reserved");
        }
        if rels.iter().any(|(n, _)| n == name) {
            return parse_err(line, format!("duplicate relation declaration {name}"));
        }
        rels.push((name.to_string(), arity));
    }
    Vocabulary::new(rels)
}

/// Parses the structure part of a file, handing unknown directives listed
/// in `extra` back to the caller.
pub(crate) fn parse_with_extras(
    text: &str,
    extra: &[&str],
    allow_equality: bool,
) -> Result<(Structure, Vec<ExtraLine>)> {
    let lines = tokenize(text);
    let mut iter = lines.into_iter();
    let Some((first_line, first)) = iter.next() else {
        return parse_err(1, "empty input; expected a vocab line");
    };
    if first[0] != "vocab" {
        return parse_err(first_line, format!("expected vocab, found {}", first[0]));
    }
    let vocab = parse_vocab(first_line, &first[1..], allow_equality)?;

    let mut name: Option<String> = None;
    let mut elems: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut tuples: Vec<Vec<Vec<Elem>>> = vec![Vec::new(); vocab.len()];
    let mut point: Option<Elem> = None;
    let mut extras = Vec::new();

    for (line, tokens) in iter {
        let args = &tokens[1..];
        match tokens[0].as_str() {
            "vocab" => return parse_err(line, "vocab may only appear on the first line"),
            "structure" => {
                if name.is_some() {
                    return parse_err(line, "duplicate structure line");
                }
                if args.len() != 1 {
                    return parse_err(line, "structure takes exactly one name");
                }
                name = Some(args[0].clone());
            }
            "elems" => {
                for e in args {
                    if index.insert(e.clone(), elems.len()).is_some() {
                        return parse_err(line, format!("duplicate element {e}"));
                    }
                    elems.push(e.clone());
                }
            }
            "rel" => {
                let Some(rname) = args.first() else {
                    return parse_err(line, "rel needs a relation name");
                };
                let Some(r) = vocab.index_of(rname) else {
                    return parse_err(line, format!("undeclared relation {rname}"));
                };
                let ids = &args[1..];
                if ids.len() != vocab.arity(r) {
                    return parse_err(
                        line,
                        format!(
                            "arity mismatch for {rname}: expected {}, got {}",
                            vocab.arity(r),
                            ids.len()
                        ),
                    );
                }
                let mut t = Vec::with_capacity(ids.len());
                for id in ids {
                    match index.get(id) {
                        Some(&e) => t.push(e),
                        None => return parse_err(line, format!("undeclared element {id}")),
                    }
                }
                tuples[r].push(t);
            }
            "point" => {
                if point.is_some() {
                    return parse_err(line, "duplicate point line");
                }
                if args.len() != 1 {
                    return parse_err(line, "point takes exactly one element");
                }
                match index.get(&args[0]) {
                    Some(&e) => point = Some(e),
                    None => return parse_err(line, format!("undeclared element {}", args[0])),
                }
            }
            d if extra.contains(&d) => extras.push(ExtraLine { line, tokens }),
            d => return parse_err(line, format!("unknown directive {d}")),
        }
    }
    let Some(name) = name else {
        return parse_err(first_line, "missing structure line");
    };
    let s = Structure::new(name, vocab, elems, tuples, point).map_err(|e| match e {
        Error::InvalidStructure(msg) => Error::Parse {
            line: first_line,
            msg,
        },
        other => other,
    })?;
    Ok((s, extras))
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    parse_with_extras(text, &[], false).map(|(s, _)| s)
}

/// Like [`parse_structure`] but admits the reserved symbol `I`.
pub fn parse_structure_with_equality(text: &str) -> Result<Structure> {
    parse_with_extras(text, &[], true).map(|(s, _)| s)
}

pub fn serialize_structure(a: &Structure) -> String {
    let mut out = String::new();
    out.push_str("vocab");
    for sym in a.vocab().symbols() {
        out.push_str(&format!(" {}/{}", sym.name, sym.arity));
    }
    out.push('\n');
    out.push_str(&format!("structure {}\n", a.name()));
    if !a.is_empty() {
        out.push_str("elems");
        for e in a.elem_names() {
            out.push(' ');
            out.push_str(e);
        }
        out.push('\n');
    }
    for r in 0..a.vocab().len() {
        for t in a.relation(r).tuples() {
            out.push_str("rel ");
            out.push_str(a.vocab().name(r));
            for &e in t {
                out.push(' ');
                out.push_str(a.elem_name(e));
            }
            out.push('\n');
        }
    }
    if let Some(p) = a.point() {
        out.push_str(&format!("point {}\n", a.elem_name(p)));
    }
    out
}
