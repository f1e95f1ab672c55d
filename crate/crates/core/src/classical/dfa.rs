use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use crate::qfa::{Alphabet, MoQfa, Word, END_MARKER};

/// A complete deterministic finite automaton.
///
/// `delta[q][i]` is the successor of `q` on the `i`-th alphabet symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub alphabet: Alphabet,
    pub delta: Vec<Vec<usize>>,
    pub start: usize,
    pub accepting: BTreeSet<usize>,
}

/// Witness that the partial order condition fails: `q1`, `q2` are
/// distinguished by `z`, `δ(q1,x) = δ(q2,x) = q2`, and `δ(q2,y) = q1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialOrderWitness {
    pub q1: usize,
    pub q2: usize,
    pub x: Word,
    pub y: Word,
    pub z: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialOrderVerdict {
    pub satisfied: bool,
    pub witness: Option<PartialOrderWitness>,
    /// The minimal DFA the witness refers to.
    pub minimal: Dfa,
}

/// Witness of an irreversible construction: `δ(q1,x) = δ(q2,x) = q2`,
/// `δ(q2,y)` accepting, and `δ(q2,z)` rejecting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrreversibleWitness {
    pub q1: usize,
    pub q2: usize,
    pub x: Word,
    pub y: Word,
    pub z: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrreversibleVerdict {
    pub present: bool,
    pub witness: Option<IrreversibleWitness>,
    pub minimal: Dfa,
}

impl Dfa {
    pub fn new(
        alphabet: Alphabet,
        delta: Vec<Vec<usize>>,
        start: usize,
        accepting: BTreeSet<usize>,
    ) -> Result<Self> {
        let n = delta.len();
        if n == 0 {
            return Err(Error::Malformed("DFA needs at least one state".into()));
        }
        for (q, row) in delta.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(Error::Malformed(format!(
                    "state {q} has {} transitions, expected {}",
                    row.len(),
                    alphabet.len()
                )));
            }
            if let Some(&t) = row.iter().find(|&&t| t >= n) {
                return Err(Error::IndexOutOfRange { index: t, dim: n });
            }
        }
        if start >= n {
            return Err(Error::IndexOutOfRange { index: start, dim: n });
        }
        if let Some(&q) = accepting.iter().find(|&&q| q >= n) {
            return Err(Error::IndexOutOfRange { index: q, dim: n });
        }
        Ok(Dfa {
            alphabet,
            delta,
            start,
            accepting,
        })
    }

    /// DFA for the words containing `z` as a (scattered) subsequence.
    pub fn subsequence(z: &[char], alphabet: &Alphabet) -> Result<Self> {
        alphabet.check_word(z)?;
        let n = z.len() + 1;
        let delta = (0..n)
            .map(|q| {
                alphabet
                    .symbols()
                    .iter()
                    .map(|&c| if q < z.len() && z[q] == c { q + 1 } else { q })
                    .collect()
            })
            .collect();
        Dfa::new(alphabet.clone(), delta, 0, BTreeSet::from([z.len()]))
    }

    pub fn n_states(&self) -> usize {
        self.delta.len()
    }

    pub fn step(&self, q: usize, c: char) -> Result<usize> {
        let i = self.alphabet.index_of(c).ok_or(Error::UnknownSymbol(c))?;
        Ok(self.delta[q][i])
    }

    pub fn run_from(&self, q: usize, w: &[char]) -> Result<usize> {
        w.iter().try_fold(q, |q, &c| self.step(q, c))
    }

    pub fn accepts(&self, w: &[char]) -> Result<bool> {
        Ok(self.accepting.contains(&self.run_from(self.start, w)?))
    }

    fn is_accepting(&self, q: usize) -> bool {
        self.accepting.contains(&q)
    }

    /// Breadth-first search over states from `from`, in alphabet order.
    /// Returns the parent table.
    fn bfs(&self, from: usize) -> Vec<Option<(usize, char)>> {
        let n = self.n_states();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(q) = queue.pop_front() {
            for (i, &c) in self.alphabet.symbols().iter().enumerate() {
                let t = self.delta[q][i];
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, c));
                    queue.push_back(t);
                }
            }
        }
        parent
    }

    /// Shortest, then lexicographically least, word leading from `from` to a
    /// state satisfying `goal`, using at least `min_steps ∈ {0, 1}` symbols.
    fn shortest_word(&self, from: usize, min_steps: usize, goal: impl Fn(usize) -> bool) -> Option<Word> {
        if min_steps == 0 && goal(from) {
            return Some(Vec::new());
        }
        // Search from each one-step successor so that the empty word is
        // excluded while the start state may still be the goal.
        let n = self.n_states();
        let mut parent: Vec<Option<(usize, char)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut first: Vec<Option<char>> = vec![None; n];
        let mut queue = VecDeque::new();
        for (i, &c) in self.alphabet.symbols().iter().enumerate() {
            let t = self.delta[from][i];
            if !seen[t] {
                seen[t] = true;
                first[t] = Some(c);
                queue.push_back(t);
            }
        }
        while let Some(q) = queue.pop_front() {
            if goal(q) {
                let mut out = Vec::new();
                let mut node = q;
                while let Some((prev, c)) = parent[node] {
                    out.push(c);
                    node = prev;
                }
                out.push(first[node].expect("root of search"));
                out.reverse();
                return Some(out);
            }
            for (i, &c) in self.alphabet.symbols().iter().enumerate() {
                let t = self.delta[q][i];
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, c));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Breadth-first search over state pairs from `(p, q)`; returns the
    /// shortest, then lexicographically least, nonempty word reaching a pair
    /// satisfying `goal`.
    fn pair_search(&self, p: usize, q: usize, goal: impl Fn(usize, usize) -> bool) -> Option<Word> {
        let n = self.n_states();
        let idx = |a: usize, b: usize| a * n + b;
        let root = idx(p, q);
        let mut parent: Vec<Option<(usize, char)>> = vec![None; n * n];
        let mut seen = vec![false; n * n];
        seen[root] = true;
        let mut queue = VecDeque::from([(p, q)]);
        while let Some((a, b)) = queue.pop_front() {
            for (i, &c) in self.alphabet.symbols().iter().enumerate() {
                let (ta, tb) = (self.delta[a][i], self.delta[b][i]);
                let t = idx(ta, tb);
                if seen[t] {
                    continue;
                }
                seen[t] = true;
                parent[t] = Some((idx(a, b), c));
                if goal(ta, tb) {
                    let mut out = Vec::new();
                    let mut node = t;
                    while node != root {
                        let (prev, c) = parent[node].expect("reached");
                        out.push(c);
                        node = prev;
                    }
                    out.reverse();
                    return Some(out);
                }
                queue.push_back((ta, tb));
            }
        }
        None
    }

    /// Shortest, then lexicographically least, word on which exactly one of
    /// `p`, `q` leads to acceptance.
    pub fn distinguishing_word(&self, p: usize, q: usize) -> Option<Word> {
        let differs = |a: usize, b: usize| self.is_accepting(a) != self.is_accepting(b);
        if differs(p, q) {
            return Some(Vec::new());
        }
        self.pair_search(p, q, differs)
    }

    /// Language-equivalent minimal DFA with states numbered in breadth-first
    /// order from the start state.
    pub fn minimize(&self) -> Dfa {
        let k = self.alphabet.len();
        let parents = self.bfs(self.start);
        let reachable: Vec<usize> = (0..self.n_states())
            .filter(|&q| q == self.start || parents[q].is_some())
            .collect();

        let mut class: BTreeMap<usize, usize> = reachable
            .iter()
            .map(|&q| (q, usize::from(self.is_accepting(q))))
            .collect();
        loop {
            let mut signatures: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
            let mut next = BTreeMap::new();
            for &q in &reachable {
                let sig = (
                    class[&q],
                    (0..k).map(|i| class[&self.delta[q][i]]).collect::<Vec<_>>(),
                );
                let len = signatures.len();
                let id = *signatures.entry(sig).or_insert(len);
                next.insert(q, id);
            }
            let before: BTreeSet<usize> = class.values().copied().collect();
            let stable = signatures.len() == before.len();
            class = next;
            if stable {
                break;
            }
        }

        // Renumber classes breadth-first from the start class.
        let mut order: BTreeMap<usize, usize> = BTreeMap::new();
        let mut rep: Vec<usize> = Vec::new();
        let mut queue = VecDeque::from([self.start]);
        order.insert(class[&self.start], 0);
        rep.push(self.start);
        while let Some(q) = queue.pop_front() {
            for i in 0..k {
                let t = self.delta[q][i];
                let c = class[&t];
                if let std::collections::btree_map::Entry::Vacant(slot) = order.entry(c) {
                    slot.insert(rep.len());
                    rep.push(t);
                    queue.push_back(t);
                }
            }
        }
        let delta = rep
            .iter()
            .map(|&q| (0..k).map(|i| order[&class[&self.delta[q][i]]]).collect())
            .collect();
        let accepting = rep
            .iter()
            .enumerate()
            .filter(|(_, &q)| self.is_accepting(q))
            .map(|(i, _)| i)
            .collect();
        Dfa {
            alphabet: self.alphabet.clone(),
            delta,
            start: 0,
            accepting,
        }
    }

    /// Product automaton accepting the intersection of both languages.
    pub fn intersection(&self, other: &Dfa) -> Result<Dfa> {
        if self.alphabet != other.alphabet {
            return Err(Error::Precondition("DFA alphabets differ".into()));
        }
        let m = other.n_states();
        let k = self.alphabet.len();
        let delta = (0..self.n_states() * m)
            .map(|s| {
                let (a, b) = (s / m, s % m);
                (0..k)
                    .map(|i| self.delta[a][i] * m + other.delta[b][i])
                    .collect()
            })
            .collect();
        let accepting = (0..self.n_states() * m)
            .filter(|s| self.is_accepting(s / m) && other.is_accepting(s % m))
            .collect();
        Dfa::new(
            self.alphabet.clone(),
            delta,
            self.start * m + other.start,
            accepting,
        )
    }

    /// Searches the minimal DFA for distinguishable `q1 ≠ q2` and nonempty
    /// `x`, `y` with `δ(q1,x) = δ(q2,x) = q2` and `δ(q2,y) = q1`.
    pub fn check_partial_order(&self) -> PartialOrderVerdict {
        let min = self.minimize();
        let n = min.n_states();
        for q1 in 0..n {
            for q2 in 0..n {
                if q1 == q2 {
                    continue;
                }
                let Some(x) = min.pair_search(q1, q2, |a, b| a == q2 && b == q2) else {
                    continue;
                };
                let Some(y) = min.shortest_word(q2, 1, |q| q == q1) else {
                    continue;
                };
                let z = min
                    .distinguishing_word(q1, q2)
                    .expect("distinct states of a minimal DFA are distinguishable");
                return PartialOrderVerdict {
                    satisfied: false,
                    witness: Some(PartialOrderWitness { q1, q2, x, y, z }),
                    minimal: min,
                };
            }
        }
        PartialOrderVerdict {
            satisfied: true,
            witness: None,
            minimal: min,
        }
    }

    /// True iff every symbol acts as a permutation of the states.
    pub fn check_gfa(&self) -> bool {
        let n = self.n_states();
        (0..self.alphabet.len()).all(|i| {
            let mut hit = vec![false; n];
            self.delta.iter().all(|row| !std::mem::replace(&mut hit[row[i]], true))
        })
    }

    /// True iff, per symbol, every state with two or more predecessors is a
    /// spin state (all of its transitions are self-loops).
    pub fn check_rfa(&self) -> bool {
        let n = self.n_states();
        let spin = |q: usize| self.delta[q].iter().all(|&t| t == q);
        (0..self.alphabet.len()).all(|i| {
            let mut indegree = vec![0usize; n];
            for row in &self.delta {
                indegree[row[i]] += 1;
            }
            (0..n).all(|q| indegree[q] < 2 || spin(q))
        })
    }

    /// Searches the minimal DFA for distinct `q1`, `q2` and a nonempty `x`
    /// with `δ(q1,x) = δ(q2,x) = q2` from which both acceptance and rejection
    /// remain reachable.
    pub fn check_irreversible(&self) -> IrreversibleVerdict {
        let min = self.minimize();
        let n = min.n_states();
        for q1 in 0..n {
            for q2 in 0..n {
                if q1 == q2 {
                    continue;
                }
                let Some(x) = min.pair_search(q1, q2, |a, b| a == q2 && b == q2) else {
                    continue;
                };
                let Some(y) = min.shortest_word(q2, 0, |q| min.is_accepting(q)) else {
                    continue;
                };
                let Some(z) = min.shortest_word(q2, 0, |q| !min.is_accepting(q)) else {
                    continue;
                };
                return IrreversibleVerdict {
                    present: true,
                    witness: Some(IrreversibleWitness { q1, q2, x, y, z }),
                    minimal: min,
                };
            }
        }
        IrreversibleVerdict {
            present: false,
            witness: None,
            minimal: min,
        }
    }

    /// The MO-QFA with the DFA's permutation matrices, identity end-marker
    /// matrix, and basis start vector. Requires a group automaton.
    pub fn to_moqfa(&self) -> Result<MoQfa> {
        if !self.check_gfa() {
            return Err(Error::Precondition(
                "DFA is not a group automaton: some symbol is not a permutation".into(),
            ));
        }
        let n = self.n_states();
        let mut transitions = BTreeMap::new();
        for (i, &c) in self.alphabet.symbols().iter().enumerate() {
            let perm: Vec<usize> = self.delta.iter().map(|row| row[i]).collect();
            transitions.insert(c, CMatrix::permutation(&perm)?);
        }
        transitions.insert(END_MARKER, CMatrix::identity(n));
        MoQfa::new(
            self.alphabet.clone(),
            transitions,
            CVector::basis(n, self.start)?,
            self.accepting.clone(),
        )
    }
}

/// Compiles a group automaton to an MO-QFA accepting its language with certainty.
pub fn gfa_to_moqfa(d: &Dfa) -> Result<MoQfa> {
    d.to_moqfa()
}
