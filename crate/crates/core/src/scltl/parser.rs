//! Recursive-descent parser for the task grammar.
//!
//! `atom := [a-z][a-z0-9-]*`; operators `!` (atoms only), `U`, `F`, `&&`,
//! `||`, parentheses. Binding strength `!` > `U` > `F` > `&&` > `||`, binary
//! operators left-associative, `F` binds its immediate operand.

use super::{Formula, ScltlError, Word};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Atom(Word),
    Bang,
    Ev,
    Unt,
    AndAnd,
    OrOr,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ScltlError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            '!' => {
                toks.push((Tok::Bang, i));
                i += 1;
            }
            '&' | '|' => {
                if i + 1 < bytes.len() && bytes[i + 1] == bytes[i] {
                    toks.push((if c == '&' { Tok::AndAnd } else { Tok::OrOr }, i));
                    i += 2;
                } else {
                    return Err(ScltlError::Syntax {
                        pos: i,
                        msg: format!("unknown operator `{c}` (did you mean `{c}{c}`?)"),
                    });
                }
            }
            'F' | 'U' => {
                let next_joined = bytes
                    .get(i + 1)
                    .is_some_and(|&b| (b as char).is_ascii_alphanumeric() || b == b'-');
                if next_joined {
                    return Err(ScltlError::Syntax {
                        pos: i,
                        msg: format!("operator `{c}` must be separated from its operand"),
                    });
                }
                toks.push((if c == 'F' { Tok::Ev } else { Tok::Unt }, i));
                i += 1;
            }
            'a'..='z' => {
                let start = i;
                while i < bytes.len() {
                    let b = bytes[i] as char;
                    if b.is_ascii_lowercase() || b.is_ascii_digit() || b == '-' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = Word::new(&src[start..i]).expect("lexed token matches word grammar");
                toks.push((Tok::Atom(word), start));
            }
            _ => {
                return Err(ScltlError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(t, _)| t.clone());
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn err(&self, msg: &str) -> ScltlError {
        ScltlError::Syntax {
            pos: self.pos(),
            msg: msg.to_owned(),
        }
    }

    fn or_expr(&mut self) -> Result<Formula, ScltlError> {
        let first = self.and_expr()?;
        let mut children = vec![first];
        while self.peek() == Some(&Tok::OrOr) {
            self.bump();
            children.push(self.and_expr()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Formula::Or(children)
        })
    }

    fn and_expr(&mut self) -> Result<Formula, ScltlError> {
        let first = self.f_expr()?;
        let mut children = vec![first];
        while self.peek() == Some(&Tok::AndAnd) {
            self.bump();
            children.push(self.f_expr()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Formula::And(children)
        })
    }

    fn f_expr(&mut self) -> Result<Formula, ScltlError> {
        if self.peek() == Some(&Tok::Ev) {
            self.bump();
            let inner = self.f_expr()?;
            return Ok(Formula::Eventually(Box::new(inner)));
        }
        self.until_expr()
    }

    fn until_expr(&mut self) -> Result<Formula, ScltlError> {
        let mut lhs = self.primary()?;
        while self.peek() == Some(&Tok::Unt) {
            self.bump();
            let rhs = self.primary()?;
            lhs = Formula::Until(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Formula, ScltlError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Atom(w)) => Ok(Formula::Atom(w)),
            Some(Tok::Bang) => match self.peek() {
                Some(Tok::Atom(_)) => {
                    let Some(Tok::Atom(w)) = self.bump() else {
                        unreachable!()
                    };
                    Ok(Formula::Not(w))
                }
                _ => Err(ScltlError::NegatedNonAtom { pos: self.pos() }),
            },
            Some(Tok::LParen) => {
                let inner = self.or_expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(ScltlError::Syntax {
                        pos,
                        msg: "unclosed parenthesis".to_owned(),
                    }),
                }
            }
            _ => Err(ScltlError::Syntax {
                pos,
                msg: "expected atom, `!`, or `(`".to_owned(),
            }),
        }
    }
}

pub(super) fn parse(src: &str) -> Result<Formula, ScltlError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        i: 0,
        end: src.len(),
    };
    let f = p.or_expr()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}
