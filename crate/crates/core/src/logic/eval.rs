//! Tarskian and Kripke satisfaction.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::formula::{Formula, Var};
use crate::structure::{Elem, Structure};

/// Partial map from variable indices to elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    bindings: BTreeMap<Var, Elem>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `x1, x2, ...` to the given elements in order.
    pub fn from_tuple(elems: &[Elem]) -> Self {
        Assignment {
            bindings: elems
                .iter()
                .enumerate()
                .map(|(i, &e)| (i as Var + 1, e))
                .collect(),
        }
    }

    pub fn bind(mut self, v: Var, e: Elem) -> Self {
        self.bindings.insert(v, e);
        self
    }

    pub fn get(&self, v: Var) -> Option<Elem> {
        self.bindings.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Elem)> + '_ {
        self.bindings.iter().map(|(&v, &e)| (v, e))
    }
}

struct Env<'a> {
    a: &'a Structure,
    slots: Vec<Option<Elem>>,
}

fn rel_index(a: &Structure, name: &str, arity: usize) -> Result<usize> {
    match a.vocab().index_of(name) {
        Some(r) if a.vocab().arity(r) == arity => Ok(r),
        Some(r) => Err(Error::VocabularyMismatch(format!(
            "{name} has arity {} but is used with {arity} arguments",
            a.vocab().arity(r)
        ))),
        None => Err(Error::VocabularyMismatch(format!(
            "unknown relation {name}"
        ))),
    }
}

impl Env<'_> {
    fn val(&self, v: Var) -> Elem {
        self.slots[v as usize].expect("free variables are checked up front")
    }

    fn first_order(&mut self, f: &Formula) -> Result<bool> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(r, vs) | Formula::NegAtom(r, vs) => {
                let rel = rel_index(self.a, r, vs.len())?;
                let t: Vec<Elem> = vs.iter().map(|&v| self.val(v)).collect();
                self.a.holds(rel, &t) == matches!(f, Formula::Atom(..))
            }
            Formula::Eq(x, y) => self.val(*x) == self.val(*y),
            Formula::NegEq(x, y) => self.val(*x) != self.val(*y),
            Formula::And(fs) => {
                for g in fs {
                    if !self.first_order(g)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for g in fs {
                    if self.first_order(g)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let want = matches!(f, Formula::Exists(..));
                let saved = self.slots[*v as usize];
                let mut result = !want;
                for e in self.a.elems() {
                    self.slots[*v as usize] = Some(e);
                    if self.first_order(g)? == want {
                        result = want;
                        break;
                    }
                }
                self.slots[*v as usize] = saved;
                result
            }
            _ => {
                return Err(Error::Precondition(
                    "formula mixes modal and first-order operators".into(),
                ))
            }
        })
    }
}

fn modal(f: &Formula, a: &Structure, w: Elem) -> Result<bool> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Prop(p) | Formula::NegProp(p) => {
            let r = rel_index(a, p, 1)?;
            a.holds(r, &[w]) == matches!(f, Formula::Prop(_))
        }
        Formula::And(fs) => {
            for g in fs {
                if !modal(g, a, w)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if modal(g, a, w)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Possibly(r, g) | Formula::Necessarily(r, g) => {
            let want = matches!(f, Formula::Possibly(..));
            let rel = rel_index(a, r, 2)?;
            for v in a.elems() {
                if a.holds(rel, &[w, v]) && modal(g, a, v)? == want {
                    return Ok(want);
                }
            }
            !want
        }
        _ => {
            return Err(Error::Precondition(
                "formula mixes modal and first-order operators".into(),
            ))
        }
    })
}

/// Does `a` satisfy `f` under `alpha`?
///
/// Modal formulas are evaluated at the element bound to `x1`, or at the
/// structure's point when `x1` is unbound.
pub fn model_check(f: &Formula, a: &Structure, alpha: &Assignment) -> Result<bool> {
    if f.has_modal() {
        if f.has_first_order() {
            return Err(Error::Precondition(
                "formula mixes modal and first-order operators".into(),
            ));
        }
        if !a.vocab().is_modal() {
            return Err(Error::NonModalVocabulary);
        }
        let w = match alpha.get(1).or(a.point()) {
            Some(w) => w,
            None => return Err(Error::MissingPoint),
        };
        return modal_at(f, a, w);
    }
    let free = f.free_vars();
    if let Some(&v) = free.iter().find(|&&v| alpha.get(v).is_none()) {
        return Err(Error::UnboundVariable(v));
    }
    for (v, e) in alpha.iter() {
        if e >= a.len() {
            return Err(Error::Precondition(format!(
                "x{v} is bound outside the universe"
            )));
        }
    }
    let max_var = max_var(f).max(alpha.iter().map(|(v, _)| v).max().unwrap_or(0));
    let mut slots = vec![None; max_var as usize + 1];
    for (v, e) in alpha.iter() {
        slots[v as usize] = Some(e);
    }
    Env { a, slots }.first_order(f)
}

/// Evaluates a modal formula at world `w`.
pub fn modal_at(f: &Formula, a: &Structure, w: Elem) -> Result<bool> {
    if f.has_first_order() {
        return Err(Error::Precondition("expected a modal formula".into()));
    }
    if !a.vocab().is_modal() {
        return Err(Error::NonModalVocabulary);
    }
    if w >= a.len() {
        return Err(Error::Precondition("world outside the universe".into()));
    }
    modal(f, a, w)
}

/// Evaluates a sentence (or a modal formula at the point).
pub fn holds(f: &Formula, a: &Structure) -> Result<bool> {
    model_check(f, a, &Assignment::new())
}

fn max_var(f: &Formula) -> Var {
    let own = match f {
        Formula::Atom(_, vs) | Formula::NegAtom(_, vs) => vs.iter().copied().max().unwrap_or(0),
        Formula::Eq(a, b) | Formula::NegEq(a, b) => (*a).max(*b),
        Formula::Exists(v, _) | Formula::Forall(v, _) => *v,
        _ => 0,
    };
    f.children().into_iter().map(max_var).fold(own, Var::max)
}

/// First-order formula with the single free variable `x` equivalent to the
/// modal formula `f` evaluated at `x`. Uses `x` and one other variable.
pub fn standard_translation(f: &Formula, x: Var) -> Result<Formula> {
    if f.has_first_order() {
        return Err(Error::Precondition(
            "standard translation needs a modal formula".into(),
        ));
    }
    let y = if x == 1 { 2 } else { 1 };
    fn go(f: &Formula, x: Var, y: Var) -> Formula {
        match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Prop(p) => Formula::atom(p, &[x]),
            Formula::NegProp(p) => Formula::neg_atom(p, &[x]),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| go(g, x, y)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| go(g, x, y)).collect()),
            Formula::Possibly(r, g) => {
                Formula::exists(y, Formula::and([Formula::atom(r, &[x, y]), go(g, y, x)]))
            }
            Formula::Necessarily(r, g) => {
                Formula::forall(y, Formula::or([Formula::neg_atom(r, &[x, y]), go(g, y, x)]))
            }
            _ => unreachable!("checked modal"),
        }
    }
    Ok(go(f, x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_structure;
    use crate::logic::formula::parse_formula;

    fn s(text: &str) -> Structure {
        parse_structure(text).unwrap()
    }

    fn p(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    #[test]
    fn first_order_examples() {
        let lp = s("vocab E/2\nstructure L\nelems u\nrel E u u");
        let edge = s("vocab E/2\nstructure D\nelems v w\nrel E v w");
        assert!(holds(&p("E x1. E(x1,x1)"), &lp).unwrap());
        let diff = p("E x1. E x2. (E(x1,x2) & !(x1=x2))");
        assert!(holds(&diff, &edge).unwrap());
        assert!(!holds(&diff, &lp).unwrap());
    }

    #[test]
    fn modal_examples() {
        let m = s("vocab P/1 R/2\nstructure K\nelems a b\nrel R a b\nrel P b\npoint a");
        assert!(holds(&p("<R> P"), &m).unwrap());
        assert!(!holds(&p("[R] !P"), &m).unwrap());
        assert!(model_check(&p("P"), &m, &Assignment::new().bind(1, 1)).unwrap());
    }

    #[test]
    fn errors() {
        let lp = s("vocab E/2\nstructure L\nelems u\nrel E u u");
        assert_eq!(holds(&p("E(x1,x2)"), &lp), Err(Error::UnboundVariable(1)));
        let tern = s("vocab T/3\nstructure T\nelems u\npoint u");
        assert_eq!(holds(&p("<T> true"), &tern), Err(Error::NonModalVocabulary));
        let unpointed = s("vocab P/1 R/2\nstructure K\nelems a");
        assert_eq!(holds(&p("P"), &unpointed), Err(Error::MissingPoint));
        assert!(holds(&p("E x1. Q(x1)"), &lp).is_err());
    }

    #[test]
    fn translation_shapes() {
        assert_eq!(standard_translation(&p("P"), 1).unwrap(), p("P(x1)"));
        assert_eq!(
            standard_translation(&p("<R> P"), 1).unwrap(),
            p("E x2. (R(x1,x2) & P(x2))")
        );
        assert_eq!(
            standard_translation(&p("[R] P"), 1).unwrap(),
            p("A x2. (!R(x1,x2) | P(x2))")
        );
        assert!(standard_translation(&p("E x1. P(x1)"), 1).is_err());
    }

    #[test]
    fn translation_agrees_on_small_models() {
        let f = p("<R> (P & [R] (!P | <R> true))");
        let tr = standard_translation(&f, 1).unwrap();
        for m in crate::corpus::pointed_kripke_up_to(3).iter().step_by(7) {
            for w in m.elems() {
                assert_eq!(
                    modal_at(&f, m, w).unwrap(),
                    model_check(&tr, m, &Assignment::new().bind(1, w)).unwrap()
                );
            }
        }
    }
}
