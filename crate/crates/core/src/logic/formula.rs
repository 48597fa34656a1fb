//! Formulas in negation normal form, with a concrete syntax
//!
//! ```text
//! true | false | R(x1,x2) | x1=x2 | !R(x1,x2) | !(x1=x2) | (f & g) | (f | g)
//! E x1. f | A x1. f | p | !p | <R> f | [R] f
//! ```
//!
//! `!` in front of anything else is pushed inwards by dualization.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::fragment::Mode;

/// Variable index; variables are written `x1, x2, ...`.
pub type Var = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<Var>),
    NegAtom(String, Vec<Var>),
    Eq(Var, Var),
    NegEq(Var, Var),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    Prop(String),
    NegProp(String),
    /// `<R> f`
    Possibly(String, Box<Formula>),
    /// `[R] f`
    Necessarily(String, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: &str, vars: &[Var]) -> Formula {
        Formula::Atom(rel.to_string(), vars.to_vec())
    }

    pub fn neg_atom(rel: &str, vars: &[Var]) -> Formula {
        Formula::NegAtom(rel.to_string(), vars.to_vec())
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn possibly(rel: &str, body: Formula) -> Formula {
        Formula::Possibly(rel.to_string(), Box::new(body))
    }

    pub fn necessarily(rel: &str, body: Formula) -> Formula {
        Formula::Necessarily(rel.to_string(), Box::new(body))
    }

    /// Conjunction that flattens nested conjunctions, drops `true` and
    /// duplicate conjuncts, and collapses on `false`.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => {
                    for q in inner {
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
                q => {
                    if !out.contains(&q) {
                        out.push(q);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().expect("one conjunct"),
            _ => Formula::And(out),
        }
    }

    /// Dual of [`Formula::and`].
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => {
                    for q in inner {
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
                q => {
                    if !out.contains(&q) {
                        out.push(q);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().expect("one disjunct"),
            _ => Formula::Or(out),
        }
    }

    /// The negation, pushed to the atoms.
    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(r, vs) => Formula::NegAtom(r.clone(), vs.clone()),
            Formula::NegAtom(r, vs) => Formula::Atom(r.clone(), vs.clone()),
            Formula::Eq(a, b) => Formula::NegEq(*a, *b),
            Formula::NegEq(a, b) => Formula::Eq(*a, *b),
            Formula::And(fs) => Formula::Or(fs.iter().map(Formula::negate).collect()),
            Formula::Or(fs) => Formula::And(fs.iter().map(Formula::negate).collect()),
            Formula::Exists(v, f) => Formula::forall(*v, f.negate()),
            Formula::Forall(v, f) => Formula::exists(*v, f.negate()),
            Formula::Prop(p) => Formula::NegProp(p.clone()),
            Formula::NegProp(p) => Formula::Prop(p.clone()),
            Formula::Possibly(r, f) => Formula::Necessarily(r.clone(), Box::new(f.negate())),
            Formula::Necessarily(r, f) => Formula::Possibly(r.clone(), Box::new(f.negate())),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn go(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Atom(_, vs) | Formula::NegAtom(_, vs) => {
                    out.extend(vs.iter().filter(|v| !bound.contains(v)));
                }
                Formula::Eq(a, b) | Formula::NegEq(a, b) => {
                    out.extend([a, b].into_iter().filter(|v| !bound.contains(v)));
                }
                Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| go(g, bound, out)),
                Formula::Exists(v, g) | Formula::Forall(v, g) => {
                    bound.push(*v);
                    go(g, bound, out);
                    bound.pop();
                }
                Formula::Possibly(_, g) | Formula::Necessarily(_, g) => go(g, bound, out),
                Formula::True | Formula::False | Formula::Prop(_) | Formula::NegProp(_) => {}
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::Exists(_, g)
            | Formula::Forall(_, g)
            | Formula::Possibly(_, g)
            | Formula::Necessarily(_, g) => vec![g],
            _ => Vec::new(),
        }
    }

    /// Contains a first-order node (atom, equality or quantifier).
    pub fn has_first_order(&self) -> bool {
        match self {
            Formula::Atom(..)
            | Formula::NegAtom(..)
            | Formula::Eq(..)
            | Formula::NegEq(..)
            | Formula::Exists(..)
            | Formula::Forall(..) => true,
            _ => self.children().into_iter().any(Formula::has_first_order),
        }
    }

    /// Contains a proposition or modality.
    pub fn has_modal(&self) -> bool {
        match self {
            Formula::Prop(_)
            | Formula::NegProp(_)
            | Formula::Possibly(..)
            | Formula::Necessarily(..) => true,
            _ => self.children().into_iter().any(Formula::has_modal),
        }
    }

    pub fn size(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::size)
            .sum::<usize>()
    }

    pub fn classify(&self) -> Classification {
        fn rank(f: &Formula) -> usize {
            match f {
                Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + rank(g),
                _ => f.children().into_iter().map(rank).max().unwrap_or(0),
            }
        }
        fn depth(f: &Formula) -> usize {
            match f {
                Formula::Possibly(_, g) | Formula::Necessarily(_, g) => 1 + depth(g),
                _ => f.children().into_iter().map(depth).max().unwrap_or(0),
            }
        }
        fn vars(f: &Formula, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Atom(_, vs) | Formula::NegAtom(_, vs) => out.extend(vs),
                Formula::Eq(a, b) | Formula::NegEq(a, b) => out.extend([a, b]),
                Formula::Exists(v, _) | Formula::Forall(v, _) => {
                    out.insert(*v);
                }
                _ => {}
            }
            f.children().into_iter().for_each(|g| vars(g, out));
        }
        fn any(f: &Formula, pred: &dyn Fn(&Formula) -> bool) -> bool {
            pred(f) || f.children().into_iter().any(|g| any(g, pred))
        }
        let mut vs = BTreeSet::new();
        vars(self, &mut vs);
        let universal = any(self, &|f| {
            matches!(f, Formula::Forall(..) | Formula::Necessarily(..))
        });
        let negative = any(self, &|f| {
            matches!(
                f,
                Formula::NegAtom(..) | Formula::NegEq(..) | Formula::NegProp(_)
            )
        });
        Classification {
            rank: rank(self),
            var_count: vs.len(),
            modal_depth: if self.has_first_order() {
                None
            } else {
                Some(depth(self))
            },
            universal,
            negative,
        }
    }
}

/// Syntactic resource usage of a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub rank: usize,
    pub var_count: usize,
    /// `None` when the formula has first-order nodes.
    pub modal_depth: Option<usize>,
    /// Contains a universal quantifier or a box.
    pub universal: bool,
    /// Contains a negated atom, equality or proposition.
    pub negative: bool,
}

impl Classification {
    pub fn in_mode(&self, mode: Mode) -> bool {
        (mode.allows_universal() || !self.universal) && (mode.allows_negation() || !self.negative)
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
    if matches!(g, Formula::Exists(..) | Formula::Forall(..)) {
        write!(f, "({g})")
    } else {
        write!(f, "{g}")
    }
}

fn write_vars(f: &mut fmt::Formatter<'_>, vs: &[Var]) -> fmt::Result {
    let parts: Vec<String> = vs.iter().map(|v| format!("x{v}")).collect();
    write!(f, "{}", parts.join(","))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(r, vs) => {
                write!(f, "{r}(")?;
                write_vars(f, vs)?;
                f.write_str(")")
            }
            Formula::NegAtom(r, vs) => {
                write!(f, "!{r}(")?;
                write_vars(f, vs)?;
                f.write_str(")")
            }
            Formula::Eq(a, b) => write!(f, "x{a}=x{b}"),
            Formula::NegEq(a, b) => write!(f, "!(x{a}=x{b})"),
            Formula::And(fs) | Formula::Or(fs) => {
                let (empty, op) = if matches!(self, Formula::And(_)) {
                    ("true", " & ")
                } else {
                    ("false", " | ")
                };
                if fs.is_empty() {
                    return f.write_str(empty);
                }
                f.write_str("(")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    write_operand(f, g)?;
                }
                f.write_str(")")
            }
            Formula::Exists(v, g) => write!(f, "E x{v}. {g}"),
            Formula::Forall(v, g) => write!(f, "A x{v}. {g}"),
            Formula::Prop(p) => f.write_str(p),
            Formula::NegProp(p) => write!(f, "!{p}"),
            Formula::Possibly(r, g) => {
                write!(f, "<{r}> ")?;
                write_operand(f, g)
            }
            Formula::Necessarily(r, g) => {
                write!(f, "[{r}] ")?;
                write_operand(f, g)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(Var),
    LParen,
    RParen,
    Comma,
    Dot,
    Amp,
    Bar,
    Bang,
    Equals,
    LAngle,
    RAngle,
    LBracket,
    RBracket,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (off, c) = bytes[i];
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Bar),
            '!' => Some(Tok::Bang),
            '=' => Some(Tok::Equals),
            '<' => Some(Tok::LAngle),
            '>' => Some(Tok::RAngle),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            _ => None,
        };
        if let Some(t) = single {
            out.push((off, t));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].1.is_alphanumeric() || bytes[i].1 == '_') {
                i += 1;
            }
            let word: String = bytes[start..i].iter().map(|(_, c)| *c).collect();
            let digits = &word[1..];
            if word.starts_with('x')
                && !digits.is_empty()
                && digits.chars().all(|c| c.is_ascii_digit())
            {
                match digits.parse::<Var>() {
                    Ok(v) if v > 0 => out.push((off, Tok::Var(v))),
                    _ => {
                        return Err(Error::FormulaSyntax {
                            offset: off,
                            msg: format!("variable index in {word} must be a positive integer"),
                        })
                    }
                }
            } else {
                out.push((off, Tok::Ident(word)));
            }
        } else {
            return Err(Error::FormulaSyntax {
                offset: off,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.toks.get(self.pos + ahead).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::FormulaSyntax {
            offset: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn var(&mut self) -> Result<Var> {
        match self.peek() {
            Some(Tok::Var(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected a variable"),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut left = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Amp) => {
                    self.pos += 1;
                    let right = self.unary()?;
                    left = Formula::and([left, right]);
                }
                Some(Tok::Bar) => {
                    self.pos += 1;
                    let right = self.unary()?;
                    left = Formula::or([left, right]);
                }
                _ => return Ok(left),
            }
        }
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(self.unary()?.negate())
            }
            Some(Tok::LAngle) => {
                self.pos += 1;
                let r = self.ident("a relation name")?;
                self.expect(Tok::RAngle, "'>'")?;
                Ok(Formula::possibly(&r, self.unary()?))
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let r = self.ident("a relation name")?;
                self.expect(Tok::RBracket, "']'")?;
                Ok(Formula::necessarily(&r, self.unary()?))
            }
            Some(Tok::Ident(q))
                if (q == "E" || q == "A")
                    && matches!(self.peek_at(1), Some(Tok::Var(_)))
                    && self.peek_at(2) == Some(&Tok::Dot) =>
            {
                let universal = q == "A";
                self.pos += 1;
                let v = self.var()?;
                self.pos += 1;
                let body = self.formula()?;
                Ok(if universal {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::Var(a)) => {
                self.pos += 1;
                self.expect(Tok::Equals, "'='")?;
                let b = self.var()?;
                Ok(Formula::Eq(a, b))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "true" => return Ok(Formula::True),
                    "false" => return Ok(Formula::False),
                    _ => {}
                }
                if self.peek() != Some(&Tok::LParen) {
                    return Ok(Formula::Prop(name));
                }
                self.pos += 1;
                let mut vars = vec![self.var()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    vars.push(self.var()?);
                }
                self.expect(Tok::RParen, "')'")?;
                Ok(Formula::Atom(name, vars))
            }
            Some(_) => self.err("unexpected token"),
            None => self.err("unexpected end of formula"),
        }
    }
}

pub fn parse_formula(src: &str) -> Result<Formula> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Formula> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = p("E x1. E x2. (E(x1,x2) & !(x1=x2))").classify();
        assert_eq!((c.rank, c.var_count), (2, 2));
        assert!(c.in_mode(Mode::Existential) && !c.in_mode(Mode::Positive));

        let c = p("A x1. E x2. E(x1,x2)").classify();
        assert_eq!(c.rank, 2);
        assert!(c.in_mode(Mode::Positive) && !c.in_mode(Mode::Existential));

        let c = p("<R> (p & [R] q)").classify();
        assert_eq!(c.modal_depth, Some(2));
        assert!(!c.in_mode(Mode::Existential));
        assert!(c.in_mode(Mode::Full));
    }

    #[test]
    fn quantifier_letters_double_as_relation_names() {
        assert_eq!(p("E(x1,x2)"), Formula::atom("E", &[1, 2]));
        assert_eq!(
            p("E x1. E(x1,x1)"),
            Formula::exists(1, Formula::atom("E", &[1, 1]))
        );
        assert_eq!(p("A"), Formula::Prop("A".into()));
    }

    #[test]
    fn negation_is_dualized() {
        assert_eq!(
            p("!(E x1. P(x1))"),
            Formula::forall(1, Formula::neg_atom("P", &[1]))
        );
        assert_eq!(
            p("!(p & <R> q)"),
            Formula::Or(vec![
                Formula::NegProp("p".into()),
                Formula::necessarily("R", Formula::NegProp("q".into()))
            ])
        );
        assert_eq!(p("!(x1=x2)"), Formula::NegEq(1, 2));
    }

    #[test]
    fn quantifier_scope_extends_right() {
        let f = p("E x1. P(x1) & Q(x1)");
        assert_eq!(f.classify().rank, 1);
        assert!(f.free_vars().is_empty());
        let g = p("(E x1. P(x1)) & Q(x1)");
        assert_eq!(g.free_vars().into_iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "E x1. E x2. (E(x1,x2) & !(x1=x2))",
            "((E x1. P(x1)) & Q(x2))",
            "A x1. (!E(x1,x1) | E x2. (x1=x2 & R(x2,x1,x2)))",
            "<R> (p & [R] !q)",
            "[R] false",
            "true",
        ] {
            let f = p(s);
            assert_eq!(p(&f.to_string()), f, "{s}");
        }
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert!(matches!(
            parse_formula("E x1."),
            Err(Error::FormulaSyntax { offset: 5, .. })
        ));
        assert!(parse_formula("R(x0)").is_err());
        assert!(parse_formula("(p & q").is_err());
        assert!(parse_formula("p q").is_err());
        assert!(parse_formula("R()").is_err());
    }

    #[test]
    fn smart_constructors_simplify() {
        let a = Formula::Prop("a".into());
        assert_eq!(Formula::and([]), Formula::True);
        assert_eq!(Formula::or([]), Formula::False);
        assert_eq!(Formula::and([a.clone(), Formula::True, a.clone()]), a);
        assert_eq!(Formula::and([a.clone(), Formula::False]), Formula::False);
        assert_eq!(Formula::or([a.clone(), Formula::True]), Formula::True);
    }
}
