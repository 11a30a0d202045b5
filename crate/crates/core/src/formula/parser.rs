use std::fmt;

use super::Formula;

/// Syntax error with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    False,
    True,
    Ident(String),
    Tilde,
    Fuse,
    Past,
    Backslash,
    Amp,
    Bar,
    Arrow,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::False => "`false`".into(),
            Tok::True => "`true`".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Tilde => "`~`".into(),
            Tok::Fuse => "`<*>`".into(),
            Tok::Past => "`<P>`".into(),
            Tok::Backslash => "`\\`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

const OPERAND: &[&str] = &["false", "true", "identifier", "~", "<*>", "<P>", "("];

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 5)].iter().collect();
        let fixed: &[(&str, Tok)] = &[
            ("<mub>", Tok::Fuse),
            ("<sup>", Tok::Fuse),
            ("<*>", Tok::Fuse),
            ("<P>", Tok::Past),
            ("->", Tok::Arrow),
            ("~", Tok::Tilde),
            ("\\", Tok::Backslash),
            ("&", Tok::Amp),
            ("|", Tok::Bar),
            ("(", Tok::LParen),
            (")", Tok::RParen),
        ];
        if let Some((lit, tok)) = fixed.iter().find(|(lit, _)| rest.starts_with(lit)) {
            out.push((tok.clone(), pos));
            let len = lit.chars().count();
            i += len;
            column += len;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            column += i - start;
            let tok = match word.as_str() {
                "false" => Tok::False,
                "true" => Tok::True,
                _ => Tok::Ident(word),
            };
            out.push((tok, pos));
            continue;
        }
        return Err(ParseError {
            line,
            column,
            message: format!("unknown token starting with `{c}`"),
            expected: Vec::new(),
        });
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        let (tok, pos) = &self.toks[self.at];
        ParseError {
            line: pos.line,
            column: pos.column,
            message: format!("unexpected {}", tok.describe()),
            expected: expected.to_vec(),
        }
    }

    // imp := or ("->" imp)?
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.residual()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.residual()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    // res := unary ("\" res)?
    fn residual(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Backslash {
            self.bump();
            let rhs = self.residual()?;
            return Ok(Formula::residual(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Fuse => {
                self.bump();
                let a = self.unary()?;
                let b = self.unary()?;
                Ok(Formula::fuse(a, b))
            }
            Tok::Past => {
                self.bump();
                Ok(Formula::past(self.unary()?))
            }
            Tok::False => {
                self.bump();
                Ok(Formula::Falsum)
            }
            Tok::True => {
                self.bump();
                Ok(Formula::Verum)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Prop(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&[")", "->", "|", "&", "\\"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error(OPERAND)),
        }
    }
}

/// Parses a formula. `<mub>` and `<sup>` are accepted as spellings of `<*>`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, at: 0 };
    let f = parser.implication()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error(&["end of input", "->", "|", "&", "\\"]));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prop(s: &str) -> Formula {
        Formula::prop(s)
    }

    #[test]
    fn fuse_takes_two_factors() {
        assert_eq!(parse("<*> p q").unwrap(), Formula::fuse(prop("p"), prop("q")));
        assert_eq!(parse("<mub> p q").unwrap(), parse("<sup> p q").unwrap());
    }

    #[test]
    fn distinguishing_formula() {
        let got = parse("(<P> p & <P> q) -> <P>(<*> p q)").unwrap();
        let want = Formula::implies(
            Formula::and(Formula::past(prop("p")), Formula::past(prop("q"))),
            Formula::past(Formula::fuse(prop("p"), prop("q"))),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn residual_axiom_shapes() {
        let l1 = parse("<*> p (p \\ q) -> q").unwrap();
        assert_eq!(
            l1,
            Formula::implies(
                Formula::fuse(prop("p"), Formula::residual(prop("p"), prop("q"))),
                prop("q")
            )
        );
        let l2 = parse("p -> q \\ (<*> p q)").unwrap();
        assert_eq!(
            l2,
            Formula::implies(
                prop("p"),
                Formula::residual(prop("q"), Formula::fuse(prop("p"), prop("q")))
            )
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // \ is right-associative and binds tighter than &
        assert_eq!(
            parse("a \\ b \\ c & d").unwrap(),
            Formula::and(
                Formula::residual(prop("a"), Formula::residual(prop("b"), prop("c"))),
                prop("d")
            )
        );
        assert_eq!(
            parse("a | b & c").unwrap(),
            Formula::or(prop("a"), Formula::and(prop("b"), prop("c")))
        );
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            Formula::implies(prop("a"), Formula::implies(prop("b"), prop("c")))
        );
        assert_eq!(
            parse("~p & q").unwrap(),
            Formula::and(Formula::not(prop("p")), prop("q"))
        );
    }

    #[test]
    fn errors_carry_position() {
        let e = parse("p &\n  & q").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(e.expected.contains(&"("));

        let e = parse("p $ q").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        assert!(e.message.contains("unknown token"));

        let e = parse("(p | q").unwrap_err();
        assert!(e.expected.contains(&")"));

        assert!(parse("<*> p").is_err());
        assert!(parse("p q").is_err());
        assert!(parse("1p").is_err());
    }

    #[test]
    fn identifiers() {
        assert_eq!(parse("p_1x").unwrap(), prop("p_1x"));
        assert_eq!(parse("falsey").unwrap(), prop("falsey"));
    }
}
