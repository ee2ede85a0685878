//! Compilation of co-safe formulas to minimal DFAs via formula progression.
//!
//! States are canonicalized progressed formulas; progression is deterministic
//! per word, so the construction is already deterministic and only needs
//! Moore minimization afterwards. Violating progressions collapse into a
//! single explicit rejecting sink (materialized only when the formula can be
//! violated at all). Accepting states and the sink are fixed points.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{Formula, ScltlError, Word};

pub type DfaState = usize;

/// Deterministic finite automaton over single-word events. Immutable after
/// construction and shareable across concurrent planner rollouts.
#[derive(Debug, Clone)]
pub struct Dfa {
    alphabet: Vec<Word>,
    word_index: BTreeMap<Word, usize>,
    /// trans[state][word index]
    trans: Vec<Vec<DfaState>>,
    labels: Vec<String>,
    accepting: Vec<bool>,
    initial: DfaState,
    sink: Option<DfaState>,
}

impl Dfa {
    /// Compile `formula` over `alphabet` (which must cover the formula's
    /// atoms). Unsatisfiable formulas are rejected explicitly.
    pub fn compile(formula: &Formula, alphabet: &[Word]) -> Result<Dfa, ScltlError> {
        let sigma: BTreeSet<Word> = alphabet.iter().cloned().collect();
        for atom in formula.atoms() {
            if !sigma.contains(&atom) {
                return Err(ScltlError::AtomOutsideAlphabet(atom));
            }
        }
        let alphabet: Vec<Word> = sigma.into_iter().collect();

        // Explore all reachable canonical progressions.
        let root = formula.clone().canonical();
        let mut ids: BTreeMap<Formula, usize> = BTreeMap::new();
        let mut forms: Vec<Formula> = Vec::new();
        let mut trans: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::new();
        ids.insert(root.clone(), 0);
        forms.push(root);
        queue.push_back(0usize);
        while let Some(s) = queue.pop_front() {
            let mut row = Vec::with_capacity(alphabet.len());
            for w in &alphabet {
                let next = forms[s].progress(w).canonical();
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = forms.len();
                        ids.insert(next.clone(), id);
                        forms.push(next);
                        queue.push_back(id);
                        id
                    }
                };
                row.push(id);
            }
            trans.push(row);
            debug_assert_eq!(trans.len(), s + 1);
        }

        let accepting: Vec<bool> = forms.iter().map(|f| *f == Formula::True).collect();
        let live = reaches_accepting(&trans, &accepting);
        if !live[0] {
            return Err(ScltlError::Unsatisfiable);
        }

        // Moore partition refinement from the acceptance coloring. Dead
        // states are pairwise equivalent, so they land in one class: the sink.
        let mut block: Vec<usize> = accepting.iter().map(|&a| usize::from(a)).collect();
        let mut num_blocks = 2.min(forms.len());
        loop {
            let mut sig_ids: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
            let mut next_block = vec![0usize; forms.len()];
            for s in 0..forms.len() {
                let sig = (
                    block[s],
                    trans[s].iter().map(|&t| block[t]).collect::<Vec<_>>(),
                );
                let n = sig_ids.len();
                let id = *sig_ids.entry(sig).or_insert(n);
                next_block[s] = id;
            }
            let new_count = sig_ids.len();
            block = next_block;
            if new_count == num_blocks {
                break;
            }
            num_blocks = new_count;
        }

        // Renumber classes by BFS from the initial state in alphabet order.
        let class_trans = |class_rep: usize, w: usize| block[trans[class_rep][w]];
        let mut rep_of_class: BTreeMap<usize, usize> = BTreeMap::new();
        for s in 0..forms.len() {
            rep_of_class.entry(block[s]).or_insert(s);
        }
        let mut order: BTreeMap<usize, usize> = BTreeMap::new();
        let mut bfs = VecDeque::new();
        order.insert(block[0], 0);
        bfs.push_back(block[0]);
        let mut final_trans: Vec<Vec<usize>> = Vec::new();
        let mut final_labels: Vec<String> = Vec::new();
        let mut final_accepting: Vec<bool> = Vec::new();
        let mut visited: Vec<usize> = Vec::new();
        while let Some(class) = bfs.pop_front() {
            visited.push(class);
            let rep = rep_of_class[&class];
            final_labels.push(forms[rep].to_string());
            final_accepting.push(accepting[rep]);
            let mut row = Vec::with_capacity(alphabet.len());
            for w in 0..alphabet.len() {
                let target = class_trans(rep, w);
                let n = order.len();
                let id = *order.entry(target).or_insert_with(|| {
                    bfs.push_back(target);
                    n
                });
                row.push(id);
            }
            final_trans.push(row);
        }

        let sink = visited
            .iter()
            .enumerate()
            .find(|(_, &class)| !live[rep_of_class[&class]])
            .map(|(new_id, _)| new_id);

        let word_index = alphabet
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(Dfa {
            alphabet,
            word_index,
            trans: final_trans,
            labels: final_labels,
            accepting: final_accepting,
            initial: 0,
            sink,
        })
    }

    pub fn initial(&self) -> DfaState {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn alphabet(&self) -> &[Word] {
        &self.alphabet
    }

    pub fn is_accepting(&self, state: DfaState) -> bool {
        self.accepting[state]
    }

    pub fn sink(&self) -> Option<DfaState> {
        self.sink
    }

    pub fn is_sink(&self, state: DfaState) -> bool {
        self.sink == Some(state)
    }

    /// Canonical formula text for a state (accepting state reads `true`).
    pub fn label(&self, state: DfaState) -> &str {
        &self.labels[state]
    }

    /// δ(state, word). Errors on words outside the alphabet.
    pub fn advance(&self, state: DfaState, word: &Word) -> Result<DfaState, ScltlError> {
        let w = self
            .word_index
            .get(word)
            .ok_or_else(|| ScltlError::UnknownWord(word.clone()))?;
        Ok(self.trans[state][*w])
    }

    /// Words that move `state` strictly toward acceptance: neither self-loops
    /// nor transitions into the sink. Empty exactly for the accepting state
    /// (and the sink itself).
    pub fn relevant_words(&self, state: DfaState) -> BTreeSet<Word> {
        self.alphabet
            .iter()
            .enumerate()
            .filter(|&(i, _)| {
                let t = self.trans[state][i];
                t != state && !self.is_sink(t)
            })
            .map(|(_, w)| w.clone())
            .collect()
    }

    /// Minimum number of words on any path from `state` to acceptance.
    pub fn distance_to_accept(&self, state: DfaState) -> Result<usize, ScltlError> {
        let mut dist = vec![usize::MAX; self.num_states()];
        let mut queue = VecDeque::new();
        dist[state] = 0;
        queue.push_back(state);
        while let Some(s) = queue.pop_front() {
            if self.accepting[s] {
                return Ok(dist[s]);
            }
            for &t in &self.trans[s] {
                if dist[t] == usize::MAX {
                    dist[t] = dist[s] + 1;
                    queue.push_back(t);
                }
            }
        }
        Err(ScltlError::NoAcceptingPath)
    }

    pub fn transitions_from(&self, state: DfaState) -> impl Iterator<Item = (&Word, DfaState)> {
        self.alphabet
            .iter()
            .zip(self.trans[state].iter().copied())
    }

    /// Graphviz rendering; self-loops on irrelevant words are omitted for
    /// readability, parallel edges are merged.
    pub fn to_dot(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "digraph dfa {{");
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  __start [shape=point];");
        for s in 0..self.num_states() {
            let shape = if self.accepting[s] {
                "doublecircle"
            } else {
                "circle"
            };
            let style = if self.is_sink(s) {
                ", style=filled, fillcolor=gray85"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  Z{s} [shape={shape}{style}, tooltip=\"{}\"];",
                self.labels[s].replace('"', "\\\"")
            );
        }
        let _ = writeln!(out, "  __start -> Z{};", self.initial);
        for s in 0..self.num_states() {
            let mut grouped: BTreeMap<usize, Vec<&Word>> = BTreeMap::new();
            for (i, &t) in self.trans[s].iter().enumerate() {
                if t != s {
                    grouped.entry(t).or_default().push(&self.alphabet[i]);
                }
            }
            for (t, words) in grouped {
                let label: Vec<&str> = words.iter().map(|w| w.as_str()).collect();
                let _ = writeln!(out, "  Z{s} -> Z{t} [label=\"{}\"];", label.join(", "));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn reaches_accepting(trans: &[Vec<usize>], accepting: &[bool]) -> Vec<bool> {
    let n = trans.len();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, row) in trans.iter().enumerate() {
        for &t in row {
            rev[t].push(s);
        }
    }
    let mut live = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| accepting[s]).collect();
    for &s in &queue {
        live[s] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &p in &rev[s] {
            if !live[p] {
                live[p] = true;
                queue.push_back(p);
            }
        }
    }
    live
}
