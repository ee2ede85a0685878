//! Syntactically co-safe LTL task formulas and their compilation to DFAs.
//!
//! Formulas are built from lowercase word tokens (`pick-pillow`, `i-a`, ...)
//! with `!` (atoms only), `U`, `F`, `&&`, `||`, in decreasing binding
//! strength. Satisfaction uses single-word event semantics: exactly one word
//! is emitted per step, so the DFA transitions on `Σ` rather than `2^Σ`.

mod dfa;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dfa::{Dfa, DfaState};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScltlError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("not syntactically co-safe: negation of a non-atom at byte {pos}")]
    NegatedNonAtom { pos: usize },
    #[error("invalid word token {0:?}: expected [a-z][a-z0-9-]*")]
    InvalidWord(String),
    #[error("formula atom `{0}` is not in the alphabet")]
    AtomOutsideAlphabet(Word),
    #[error("formula is unsatisfiable: no accepting state is reachable")]
    Unsatisfiable,
    #[error("unknown word `{0}`")]
    UnknownWord(Word),
    #[error("no accepting state is reachable from this state")]
    NoAcceptingPath,
}

/// One alphabet symbol: an interaction proposition such as `pick-pillow`.
///
/// By convention a word is `<skill>-<object>`; the part before the first
/// hyphen names the skill (used for interaction durations) and the rest
/// names the object searched for.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(String);

impl Word {
    pub fn new(s: &str) -> Result<Word, ScltlError> {
        let mut chars = s.chars();
        let head_ok = chars.next().is_some_and(|c| c.is_ascii_lowercase());
        let tail_ok = chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-');
        if head_ok && tail_ok {
            Ok(Word(s.to_owned()))
        } else {
            Err(ScltlError::InvalidWord(s.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Skill prefix before the first hyphen; empty when the word has none.
    pub fn skill(&self) -> &str {
        self.0.split_once('-').map_or("", |(s, _)| s)
    }

    /// Object token after the first hyphen, or the whole word when it has none.
    pub fn object(&self) -> &str {
        self.0.split_once('-').map_or(self.0.as_str(), |(_, o)| o)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl std::str::FromStr for Word {
    type Err = ScltlError;
    fn from_str(s: &str) -> Result<Word, ScltlError> {
        Word::new(s)
    }
}

impl TryFrom<String> for Word {
    type Error = ScltlError;
    fn try_from(s: String) -> Result<Word, ScltlError> {
        Word::new(&s)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.0
    }
}

/// Co-safe formula AST. `True`/`False` arise only through progression, never
/// from the parser.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Word),
    Not(Word),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Eventually(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn parse(text: &str) -> Result<Formula, ScltlError> {
        parser::parse(text)
    }

    pub fn atoms(&self) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Word>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(w) | Formula::Not(w) => {
                out.insert(w.clone());
            }
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    c.collect_atoms(out);
                }
            }
            Formula::Eventually(f) => f.collect_atoms(out),
            Formula::Until(f, g) => {
                f.collect_atoms(out);
                g.collect_atoms(out);
            }
        }
    }

    /// One progression step under single-word event semantics: the returned
    /// formula holds on the remaining trace iff `self` holds on `word` followed
    /// by that trace. Result is normalized.
    pub(crate) fn progress(&self, word: &Word) -> Formula {
        self.progress_raw(word).normalize()
    }

    fn progress_raw(&self, word: &Word) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => {
                if a == word {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Formula::Not(a) => {
                if a == word {
                    Formula::False
                } else {
                    Formula::True
                }
            }
            Formula::And(cs) => Formula::And(cs.iter().map(|c| c.progress_raw(word)).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(|c| c.progress_raw(word)).collect()),
            Formula::Eventually(f) => Formula::Or(vec![
                f.progress_raw(word),
                Formula::Eventually(f.clone()),
            ]),
            Formula::Until(f, g) => Formula::Or(vec![
                g.progress_raw(word),
                Formula::And(vec![
                    f.progress_raw(word),
                    Formula::Until(f.clone(), g.clone()),
                ]),
            ]),
        }
    }

    /// Flatten nested conjunctions/disjunctions, drop units, sort and
    /// deduplicate commutative children.
    fn normalize(self) -> Formula {
        match self {
            Formula::And(cs) => {
                let mut out: Vec<Formula> = Vec::new();
                for c in cs {
                    match c.normalize() {
                        Formula::True => {}
                        Formula::False => return Formula::False,
                        Formula::And(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                out.sort();
                out.dedup();
                match out.len() {
                    0 => Formula::True,
                    1 => out.pop().unwrap(),
                    _ => Formula::And(out),
                }
            }
            Formula::Or(cs) => {
                let mut out: Vec<Formula> = Vec::new();
                for c in cs {
                    match c.normalize() {
                        Formula::False => {}
                        Formula::True => return Formula::True,
                        Formula::Or(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                out.sort();
                out.dedup();
                match out.len() {
                    0 => Formula::False,
                    1 => out.pop().unwrap(),
                    _ => Formula::Or(out),
                }
            }
            Formula::Eventually(f) => Formula::Eventually(Box::new(f.normalize())),
            Formula::Until(f, g) => {
                Formula::Until(Box::new(f.normalize()), Box::new(g.normalize()))
            }
            leaf => leaf,
        }
    }

    /// Semantic canonical form used for DFA state identity: the unique
    /// minimal monotone DNF over the formula's non-Boolean leaves. Progression
    /// never introduces negation above the leaf level, so every progressed
    /// formula is a positive combination of leaves and this form is canonical.
    fn canonical(self) -> Formula {
        let n = self.normalize();
        if matches!(n, Formula::True | Formula::False) {
            return n;
        }
        let mut leaves: BTreeSet<Formula> = BTreeSet::new();
        n.collect_leaves(&mut leaves);
        let leaves: Vec<Formula> = leaves.into_iter().collect();
        // Guard against pathological leaf counts; normalization alone is
        // still sound, just a weaker state identity.
        if leaves.len() > 16 {
            return n;
        }
        let mut minimal: Vec<u32> = Vec::new();
        for mask in 0u32..(1 << leaves.len()) {
            if !n.eval_mask(&leaves, mask) {
                continue;
            }
            // Positive combination => monotone, so checking one-bit-removed
            // submasks suffices for minimality.
            let is_min = (0..leaves.len())
                .filter(|b| mask & (1 << b) != 0)
                .all(|b| !n.eval_mask(&leaves, mask & !(1 << b)));
            if is_min {
                minimal.push(mask);
            }
        }
        if minimal.is_empty() {
            return Formula::False;
        }
        if minimal == [0] {
            return Formula::True;
        }
        let groups: Vec<Formula> = minimal
            .iter()
            .map(|mask| {
                let picked: Vec<Formula> = (0..leaves.len())
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| leaves[b].clone())
                    .collect();
                Formula::And(picked)
            })
            .collect();
        Formula::Or(groups).normalize()
    }

    fn collect_leaves(&self, out: &mut BTreeSet<Formula>) {
        match self {
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    c.collect_leaves(out);
                }
            }
            Formula::True | Formula::False => {}
            leaf => {
                out.insert(leaf.clone());
            }
        }
    }

    fn eval_mask(&self, leaves: &[Formula], mask: u32) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::And(cs) => cs.iter().all(|c| c.eval_mask(leaves, mask)),
            Formula::Or(cs) => cs.iter().any(|c| c.eval_mask(leaves, mask)),
            leaf => {
                let idx = leaves
                    .iter()
                    .position(|l| l == leaf)
                    .expect("leaf collected before evaluation");
                mask & (1 << idx) != 0
            }
        }
    }

    // Precedence levels for display: `||` 0, `&&` 1, `F` 2, `U` 3, leaves 4.
    fn prec(&self) -> u8 {
        match self {
            Formula::Or(_) => 0,
            Formula::And(_) => 1,
            Formula::Eventually(_) => 2,
            Formula::Until(..) => 3,
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, required: u8) -> fmt::Result {
        if self.prec() < required {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(w) => write!(f, "{w}"),
            Formula::Not(w) => write!(f, "!{w}"),
            Formula::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " && ")?;
                    }
                    c.fmt_prec(f, 2)?;
                }
                Ok(())
            }
            Formula::Or(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " || ")?;
                    }
                    c.fmt_prec(f, 1)?;
                }
                Ok(())
            }
            Formula::Eventually(inner) => {
                write!(f, "F ")?;
                inner.fmt_prec(f, 2)
            }
            Formula::Until(lhs, rhs) => {
                lhs.fmt_prec(f, 4)?;
                write!(f, " U ")?;
                rhs.fmt_prec(f, 4)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
