use std::fmt;

use crate::error::{Error, Result};
use crate::qfa::{word_string, Alphabet, Word};

/// Boolean combination of subsequence atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PtestExpr {
    /// Words containing the given symbols in order, not necessarily adjacent.
    Atom(Word),
    And(Vec<PtestExpr>),
    Or(Vec<PtestExpr>),
    Not(Box<PtestExpr>),
}

/// Greedy left-to-right subsequence test.
pub fn subseq_oracle(z: &[char], w: &[char]) -> bool {
    let mut need = z.iter().peekable();
    for c in w {
        if need.peek() == Some(&c) {
            need.next();
        }
    }
    need.peek().is_none()
}

impl PtestExpr {
    pub fn atom(z: &str) -> Self {
        PtestExpr::Atom(z.chars().collect())
    }

    pub fn not(e: PtestExpr) -> Self {
        PtestExpr::Not(Box::new(e))
    }

    /// Membership of `w` in the language denoted by the expression.
    pub fn evaluate(&self, w: &[char]) -> bool {
        match self {
            PtestExpr::Atom(z) => subseq_oracle(z, w),
            PtestExpr::And(cs) => cs.iter().all(|c| c.evaluate(w)),
            PtestExpr::Or(cs) => cs.iter().any(|c| c.evaluate(w)),
            PtestExpr::Not(c) => !c.evaluate(w),
        }
    }

    /// All atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<&Word> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Word>) {
        match self {
            PtestExpr::Atom(z) => out.push(z),
            PtestExpr::And(cs) | PtestExpr::Or(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
            PtestExpr::Not(c) => c.collect_atoms(out),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            PtestExpr::Or(_) => 0,
            PtestExpr::And(_) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for PtestExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, c: &PtestExpr, min: u8| {
            if c.precedence() < min {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        };
        match self {
            PtestExpr::Atom(z) => write!(f, "\"{}\"", word_string(z)),
            PtestExpr::Not(c) => {
                write!(f, "!")?;
                child(f, c, 2)
            }
            PtestExpr::And(cs) | PtestExpr::Or(cs) => {
                let (sep, min) = match self {
                    PtestExpr::And(_) => (" & ", 2),
                    _ => (" | ", 1),
                };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    child(f, c, min)?;
                }
                Ok(())
            }
        }
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn error<T>(&self, position: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<PtestExpr> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            PtestExpr::Or(terms)
        })
    }

    fn term(&mut self) -> Result<PtestExpr> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some('&') {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            PtestExpr::And(factors)
        })
    }

    fn factor(&mut self) -> Result<PtestExpr> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(PtestExpr::not(self.factor()?))
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    let found = self.describe_here();
                    return self.error(self.pos, format!("expected ')', found {found}"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('"') => self.atom(),
            _ => {
                let found = self.describe_here();
                self.error(self.pos, format!("expected '!', '(' or a quoted atom, found {found}"))
            }
        }
    }

    fn atom(&mut self) -> Result<PtestExpr> {
        let start = self.pos;
        self.pos += 1;
        let mut z = Vec::new();
        loop {
            match self.chars.get(self.pos) {
                None => return self.error(start, "unterminated atom"),
                Some('"') => {
                    self.pos += 1;
                    return Ok(PtestExpr::Atom(z));
                }
                Some(&c) => {
                    if !self.alphabet.contains(c) {
                        return self.error(
                            self.pos,
                            format!("symbol {c:?} is not in the alphabet {{{}}}", self.alphabet),
                        );
                    }
                    z.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn describe_here(&self) -> String {
        match self.chars.get(self.pos) {
            Some(c) => format!("{c:?}"),
            None => "end of input".into(),
        }
    }
}

/// Parses `expr := term ('|' term)*`, `term := factor ('&' factor)*`,
/// `factor := '!' factor | '(' expr ')' | "atom"`. Positions in errors are
/// character offsets.
pub fn parse_expr(text: &str, alphabet: &Alphabet) -> Result<PtestExpr> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        alphabet,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        let found = p.describe_here();
        return p.error(p.pos, format!("unexpected {found}"));
    }
    Ok(e)
}
