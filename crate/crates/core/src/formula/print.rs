use std::fmt;

use super::Formula;

// Binding strength, loosest first.
const IMP: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const RES: u8 = 4;
const UNARY: u8 = 5;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => IMP,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        Formula::Residual(..) => RES,
        _ => UNARY,
    }
}

fn child(out: &mut fmt::Formatter<'_>, f: &Formula, min: u8) -> fmt::Result {
    if level(f) < min {
        out.write_str("(")?;
        write_formula(out, f)?;
        out.write_str(")")
    } else {
        write_formula(out, f)
    }
}

// Operands of prefix operators; nested prefix applications get parentheses for readability.
fn operand(out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
    match f {
        Formula::Fuse(..) | Formula::Past(_) => {
            out.write_str("(")?;
            write_formula(out, f)?;
            out.write_str(")")
        }
        _ => child(out, f, UNARY),
    }
}

pub(super) fn write_formula(out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
    match f {
        Formula::Falsum => out.write_str("false"),
        Formula::Verum => out.write_str("true"),
        Formula::Prop(p) => out.write_str(p),
        Formula::Not(a) => {
            out.write_str("~")?;
            child(out, a, UNARY)
        }
        Formula::Fuse(a, b) => {
            out.write_str("<*> ")?;
            operand(out, a)?;
            out.write_str(" ")?;
            operand(out, b)
        }
        Formula::Past(a) => {
            out.write_str("<P> ")?;
            operand(out, a)
        }
        Formula::Implies(a, b) => {
            child(out, a, OR)?;
            out.write_str(" -> ")?;
            child(out, b, IMP)
        }
        Formula::Or(a, b) => {
            child(out, a, OR)?;
            out.write_str(" | ")?;
            child(out, b, AND)
        }
        Formula::And(a, b) => {
            child(out, a, AND)?;
            out.write_str(" & ")?;
            child(out, b, RES)
        }
        Formula::Residual(a, b) => {
            child(out, a, UNARY)?;
            out.write_str(" \\ ")?;
            child(out, b, RES)
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::formula::parse;

    #[test]
    fn prints_with_minimal_parentheses() {
        let cases = [
            "<P> p & <P> q -> <P> (<*> p q)",
            "<*> p (p \\ q) -> q",
            "p -> q \\ <*> p q",
            "(a -> b) -> c",
            "a | b | c",
            "a | (b | c)",
            "(a \\ b) \\ c",
            "~~p",
            "~(p | q)",
        ];
        for c in cases {
            let f = parse(c).unwrap();
            assert_eq!(f.to_string(), c);
        }
    }
}
