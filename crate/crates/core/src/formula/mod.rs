//! Formulas of the modal language with one binary fusion modality and its
//! residual implication.
//!
//! The fusion modality is a single connective ([`Formula::Fuse`]); whether it
//! is read through minimal or least upper bounds is decided when a formula is
//! evaluated, not when it is built.

mod parser;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

pub use parser::{parse, ParseError};

/// A formula of the language.
///
/// `Verum`, `And`, `Implies` and `Past` are abbreviations; see
/// [`Formula::desugar`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Falsum,
    Verum,
    Prop(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// `<*> a b`: some fusion of an `a`-point and a `b`-point.
    Fuse(Box<Formula>, Box<Formula>),
    /// `a \ b`: every fusion of the current point with an `a`-point is a `b`-point.
    Residual(Box<Formula>, Box<Formula>),
    /// `<P> a`: some point below satisfies `a`.
    Past(Box<Formula>),
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Prop(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// `(a -> b) & (b -> a)`; the language has no primitive biconditional.
    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    pub fn fuse(a: Formula, b: Formula) -> Self {
        Formula::Fuse(Box::new(a), Box::new(b))
    }

    pub fn residual(a: Formula, b: Formula) -> Self {
        Formula::Residual(Box::new(a), Box::new(b))
    }

    pub fn past(a: Formula) -> Self {
        Formula::Past(Box::new(a))
    }

    /// Rewrites the abbreviations into the core connectives
    /// `Falsum, Prop, Not, Or, Fuse, Residual`.
    pub fn desugar(&self) -> Formula {
        use Formula::*;
        match self {
            Falsum => Falsum,
            Verum => Formula::not(Falsum),
            Prop(p) => Prop(p.clone()),
            Not(a) => Formula::not(a.desugar()),
            Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            And(a, b) => Formula::not(Formula::or(
                Formula::not(a.desugar()),
                Formula::not(b.desugar()),
            )),
            Implies(a, b) => Formula::or(Formula::not(a.desugar()), b.desugar()),
            Fuse(a, b) => Formula::fuse(a.desugar(), b.desugar()),
            Residual(a, b) => Formula::residual(a.desugar(), b.desugar()),
            Past(a) => Formula::fuse(a.desugar(), Formula::not(Falsum)),
        }
    }

    /// True when the formula uses only the core connectives.
    pub fn is_core(&self) -> bool {
        use Formula::*;
        match self {
            Falsum | Prop(_) => true,
            Verum | And(..) | Implies(..) | Past(_) => false,
            Not(a) => a.is_core(),
            Or(a, b) | Fuse(a, b) | Residual(a, b) => a.is_core() && b.is_core(),
        }
    }

    /// Maximal nesting of `Fuse`, `Residual` and `Past`.
    pub fn modal_depth(&self) -> usize {
        use Formula::*;
        match self {
            Falsum | Verum | Prop(_) => 0,
            Not(a) => a.modal_depth(),
            Or(a, b) | And(a, b) | Implies(a, b) => a.modal_depth().max(b.modal_depth()),
            Fuse(a, b) | Residual(a, b) => 1 + a.modal_depth().max(b.modal_depth()),
            Past(a) => 1 + a.modal_depth(),
        }
    }

    /// Number of connectives (constants and letters count 0).
    pub fn size(&self) -> usize {
        use Formula::*;
        match self {
            Falsum | Verum | Prop(_) => 0,
            Not(a) | Past(a) => 1 + a.size(),
            Or(a, b) | And(a, b) | Implies(a, b) | Fuse(a, b) | Residual(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn prop_letters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_letters(&mut out);
        out
    }

    fn collect_letters(&self, out: &mut BTreeSet<String>) {
        use Formula::*;
        match self {
            Falsum | Verum => {}
            Prop(p) => {
                out.insert(p.clone());
            }
            Not(a) | Past(a) => a.collect_letters(out),
            Or(a, b) | And(a, b) | Implies(a, b) | Fuse(a, b) | Residual(a, b) => {
                a.collect_letters(out);
                b.collect_letters(out);
            }
        }
    }

    /// Uniform substitution. Letters missing from `subst` are left in place.
    pub fn substitute(&self, subst: &BTreeMap<String, Formula>) -> Formula {
        use Formula::*;
        let bin = |a: &Formula, b: &Formula| {
            (Box::new(a.substitute(subst)), Box::new(b.substitute(subst)))
        };
        match self {
            Falsum => Falsum,
            Verum => Verum,
            Prop(p) => subst.get(p).cloned().unwrap_or_else(|| Prop(p.clone())),
            Not(a) => Not(Box::new(a.substitute(subst))),
            Past(a) => Past(Box::new(a.substitute(subst))),
            Or(a, b) => {
                let (a, b) = bin(a, b);
                Or(a, b)
            }
            And(a, b) => {
                let (a, b) = bin(a, b);
                And(a, b)
            }
            Implies(a, b) => {
                let (a, b) = bin(a, b);
                Implies(a, b)
            }
            Fuse(a, b) => {
                let (a, b) = bin(a, b);
                Fuse(a, b)
            }
            Residual(a, b) => {
                let (a, b) = bin(a, b);
                Residual(a, b)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_formula(f, self)
    }
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn desugar_examples() {
        assert_eq!(
            p("<P> p").desugar(),
            Formula::fuse(Formula::prop("p"), Formula::not(Formula::Falsum))
        );
        assert_eq!(Formula::Falsum.desugar(), Formula::Falsum);
        assert_eq!(
            p("p & q").desugar(),
            Formula::not(Formula::or(
                Formula::not(Formula::prop("p")),
                Formula::not(Formula::prop("q"))
            ))
        );
        assert!(p("(<P> p & <P> q) -> <P>(<*> p q)").desugar().is_core());
    }

    #[test]
    fn modal_depth_examples() {
        assert_eq!(p("p").modal_depth(), 0);
        assert_eq!(p("<*> p q").modal_depth(), 1);
        assert_eq!(p("<*> (<*> p q) (p \\ q)").modal_depth(), 2);
        assert_eq!(p("~(p | q) & true").modal_depth(), 0);
    }

    #[test]
    fn prop_letter_examples() {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(p("<*> p q").prop_letters(), set(&["p", "q"]));
        assert_eq!(Formula::Falsum.prop_letters(), set(&[]));
        assert_eq!(p("p \\ <*> p r").prop_letters(), set(&["p", "r"]));
    }

    #[test]
    fn substitution_replaces_letters_simultaneously() {
        let mut s = BTreeMap::new();
        s.insert("p".to_string(), p("q"));
        s.insert("q".to_string(), p("p | r"));
        assert_eq!(p("<*> p q").substitute(&s), p("<*> q (p | r)"));
    }
}
