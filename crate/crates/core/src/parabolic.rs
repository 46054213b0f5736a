//! Parabolic coset combinatorics: `^J W`, `W^K`, `^J W^K`, Bruhat order and
//! the length-maximal elements `x^{J,K}` of double-coset fibers.

use std::collections::VecDeque;

use crate::parallel::Execution;
use crate::rootdata::{ElemId, NodeSet, WeylGroup};

/// Groups up to this order get their double-coset fibers materialized.
pub const EAGER_FIBER_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParabolicError {
    #[error("{word} is not a minimal double coset representative for J={j:?}, K={k:?}")]
    NotARepresentative { word: String, j: NodeSet, k: NodeSet },
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),
}

/// Minimal-length representatives of `W_J \ W`.
#[derive(Debug, Clone)]
pub struct CosetTable {
    j: NodeSet,
    reps: Vec<ElemId>,
    index: Vec<ElemId>,
}

impl CosetTable {
    pub fn j(&self) -> NodeSet {
        self.j
    }

    /// Representatives sorted by (length, canonical word).
    pub fn reps(&self) -> &[ElemId] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Representative of the coset containing `w`.
    pub fn rep_of(&self, w: ElemId) -> ElemId {
        self.index[w.index()]
    }

    pub fn contains(&self, w: ElemId) -> bool {
        self.rep_of(w) == w
    }

    pub fn position(&self, w: ElemId) -> Option<usize> {
        self.reps.binary_search(&w).ok()
    }
}

/// Minimal element of `W_J w`: strip left descents in `J`.
pub fn left_reduce(group: &WeylGroup, mut w: ElemId, j: NodeSet) -> ElemId {
    while let Some(i) = j.iter().find(|&i| group.is_left_descent(w, i)) {
        w = group.left_mul(i, w);
    }
    w
}

/// Minimal element of `w W_K`.
pub fn right_reduce(group: &WeylGroup, mut w: ElemId, k: NodeSet) -> ElemId {
    while let Some(i) = k.iter().find(|&i| group.is_right_descent(w, i)) {
        w = group.right_mul(w, i);
    }
    w
}

pub fn min_coset_reps(group: &WeylGroup, j: NodeSet) -> CosetTable {
    min_coset_reps_with(group, j, Execution::default())
}

pub fn min_coset_reps_with(group: &WeylGroup, j: NodeSet, exec: Execution) -> CosetTable {
    let index: Vec<ElemId> = exec.map_range(group.len(), |w| left_reduce(group, ElemId(w as u32), j));
    let reps = group.ids().filter(|&w| index[w.index()] == w).collect();
    CosetTable { j, reps, index }
}

/// Minimal-length representatives of `W / W_K`, as a table keyed by the
/// right coset.
pub fn right_coset_reps(group: &WeylGroup, k: NodeSet) -> CosetTable {
    let index: Vec<ElemId> = Execution::default()
        .map_range(group.len(), |w| right_reduce(group, ElemId(w as u32), k));
    let reps = group.ids().filter(|&w| index[w.index()] == w).collect();
    CosetTable { j: k, reps, index }
}

/// Elements of the standard parabolic subgroup `W_J`, sorted.
pub fn parabolic_elements(group: &WeylGroup, j: NodeSet) -> Vec<ElemId> {
    let mut seen = vec![false; group.len()];
    let mut out = vec![ElemId::IDENTITY];
    seen[0] = true;
    let mut queue = VecDeque::from([ElemId::IDENTITY]);
    while let Some(w) = queue.pop_front() {
        for i in j.iter() {
            let v = group.left_mul(i, w);
            if !seen[v.index()] {
                seen[v.index()] = true;
                out.push(v);
                queue.push_back(v);
            }
        }
    }
    out.sort();
    out
}

/// Bruhat order `u <= w`.
///
/// Walks the canonical reduced word of `w` from the right. At each letter
/// `s` (a right descent of the remaining prefix) `u` is replaced by
/// `min(u, us)`; `u <= w` iff this ends at the identity. This is the greedy
/// form of the subword criterion against that fixed reduced word.
pub fn bruhat_leq(group: &WeylGroup, u: ElemId, w: ElemId) -> bool {
    if group.length(u) > group.length(w) {
        return false;
    }
    let mut u = u;
    for &s in group.word(w).iter().rev() {
        let s = s as usize;
        if group.is_right_descent(u, s) {
            u = group.right_mul(u, s);
        }
    }
    u == ElemId::IDENTITY
}

/// Minimal representatives of `W_J \ W / W_K` with their fibers
/// `^J W ∩ W_J x W_K`.
#[derive(Debug, Clone)]
pub struct DoubleCosetTable {
    j: NodeSet,
    k: NodeSet,
    reps: Vec<ElemId>,
    fibers: Option<Vec<Vec<ElemId>>>,
}

impl DoubleCosetTable {
    pub fn j(&self) -> NodeSet {
        self.j
    }

    pub fn k(&self) -> NodeSet {
        self.k
    }

    pub fn reps(&self) -> &[ElemId] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn is_eager(&self) -> bool {
        self.fibers.is_some()
    }

    /// `^J W ∩ W_J x W_K`, sorted. Materialized tables answer from memory,
    /// lazy ones walk the double coset.
    pub fn fiber(&self, group: &WeylGroup, x: ElemId) -> Result<Vec<ElemId>, ParabolicError> {
        let pos = self.reps.binary_search(&x).map_err(|_| not_a_rep(group, x, self.j, self.k))?;
        match &self.fibers {
            Some(f) => Ok(f[pos].clone()),
            None => Ok(double_coset(group, x, self.j, self.k)
                .into_iter()
                .filter(|&w| left_reduce(group, w, self.j) == w)
                .collect()),
        }
    }
}

fn not_a_rep(group: &WeylGroup, x: ElemId, j: NodeSet, k: NodeSet) -> ParabolicError {
    ParabolicError::NotARepresentative {
        word: group.word_string(x),
        j,
        k,
    }
}

/// Unique minimal-length element of `W_J w W_K`.
pub fn project_double(group: &WeylGroup, w: ElemId, j: NodeSet, k: NodeSet) -> ElemId {
    let mut w = w;
    loop {
        if let Some(i) = j.iter().find(|&i| group.is_left_descent(w, i)) {
            w = group.left_mul(i, w);
        } else if let Some(i) = k.iter().find(|&i| group.is_right_descent(w, i)) {
            w = group.right_mul(w, i);
        } else {
            return w;
        }
    }
}

pub fn is_double_rep(group: &WeylGroup, x: ElemId, j: NodeSet, k: NodeSet) -> bool {
    j.iter().all(|i| !group.is_left_descent(x, i)) && k.iter().all(|i| !group.is_right_descent(x, i))
}

/// All elements of `W_J x W_K`, sorted.
pub fn double_coset(group: &WeylGroup, x: ElemId, j: NodeSet, k: NodeSet) -> Vec<ElemId> {
    let mut seen = std::collections::HashSet::from([x]);
    let mut queue = VecDeque::from([x]);
    while let Some(w) = queue.pop_front() {
        let left = j.iter().map(|i| group.left_mul(i, w));
        let right = k.iter().map(|i| group.right_mul(w, i));
        for v in left.chain(right).collect::<Vec<_>>() {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    let mut out: Vec<ElemId> = seen.into_iter().collect();
    out.sort();
    out
}

pub fn min_double_coset_reps(group: &WeylGroup, j: NodeSet, k: NodeSet) -> DoubleCosetTable {
    min_double_coset_reps_with(group, j, k, Execution::default())
}

pub fn min_double_coset_reps_with(
    group: &WeylGroup,
    j: NodeSet,
    k: NodeSet,
    exec: Execution,
) -> DoubleCosetTable {
    let eager = group.len() <= EAGER_FIBER_LIMIT;
    if eager {
        let proj = exec.map_range(group.len(), |w| project_double(group, ElemId(w as u32), j, k));
        let reps: Vec<ElemId> = group.ids().filter(|&w| proj[w.index()] == w).collect();
        let mut fibers = vec![Vec::new(); reps.len()];
        for w in group.ids() {
            if left_reduce(group, w, j) == w {
                let pos = reps.binary_search(&proj[w.index()]).expect("projection is a rep");
                fibers[pos].push(w);
            }
        }
        DoubleCosetTable {
            j,
            k,
            reps,
            fibers: Some(fibers),
        }
    } else {
        let flags = exec.map_range(group.len(), |w| is_double_rep(group, ElemId(w as u32), j, k));
        let reps = group.ids().filter(|w| flags[w.index()]).collect();
        DoubleCosetTable {
            j,
            k,
            reps,
            fibers: None,
        }
    }
}

/// `x^{J,K}`: the unique length-maximal element of `^J W ∩ W_J x W_K`.
pub fn max_length_in_fiber(
    group: &WeylGroup,
    x: ElemId,
    j: NodeSet,
    k: NodeSet,
) -> Result<ElemId, ParabolicError> {
    if !is_double_rep(group, x, j, k) {
        return Err(not_a_rep(group, x, j, k));
    }
    let fiber: Vec<ElemId> = double_coset(group, x, j, k)
        .into_iter()
        .filter(|&w| left_reduce(group, w, j) == w)
        .collect();
    max_of_fiber(group, &fiber)
}

pub(crate) fn max_of_fiber(group: &WeylGroup, fiber: &[ElemId]) -> Result<ElemId, ParabolicError> {
    let top = fiber
        .iter()
        .map(|&w| group.length(w))
        .max()
        .ok_or_else(|| ParabolicError::InternalConsistency("empty fiber".into()))?;
    let maxima: Vec<ElemId> = fiber.iter().copied().filter(|&w| group.length(w) == top).collect();
    if maxima.len() != 1 {
        return Err(ParabolicError::InternalConsistency(format!(
            "{} elements of maximal length {top} in a fiber",
            maxima.len()
        )));
    }
    Ok(maxima[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootdata::Side;

    fn a2() -> std::sync::Arc<WeylGroup> {
        WeylGroup::from_series("A2").unwrap()
    }

    fn words(g: &WeylGroup, ids: &[ElemId]) -> Vec<String> {
        ids.iter().map(|&w| g.word_string(w)).collect()
    }

    #[test]
    fn a2_coset_reps_for_s0() {
        let g = a2();
        let t = min_coset_reps(&g, NodeSet::from_iter([0]));
        // Brute force: elements with no left descent s0.
        let brute: Vec<ElemId> = g
            .ids()
            .filter(|&w| !g.descents(w, Side::Left).contains(0))
            .collect();
        assert_eq!(t.reps(), brute.as_slice());
        assert_eq!(words(&g, t.reps()), ["e", "s1", "s1s0"]);
        let lens: Vec<usize> = t.reps().iter().map(|&w| g.length(w)).collect();
        assert_eq!(lens, [0, 1, 2]);
    }

    #[test]
    fn trivial_coset_tables() {
        let g = a2();
        assert_eq!(min_coset_reps(&g, NodeSet::EMPTY).len(), g.len());
        assert_eq!(min_coset_reps(&g, NodeSet::full(2)).reps(), &[ElemId::IDENTITY]);
    }

    #[test]
    fn a2_bruhat_examples() {
        let g = a2();
        let s0 = g.simple(0);
        let s1 = g.simple(1);
        let s0s1 = g.mul(s0, s1);
        assert!(bruhat_leq(&g, s0, s0s1));
        assert!(!bruhat_leq(&g, s0, s1));
        let w0 = g.longest(NodeSet::full(2));
        for w in g.ids() {
            assert!(bruhat_leq(&g, ElemId::IDENTITY, w));
            assert_eq!(bruhat_leq(&g, w0, w), w == w0);
        }
    }

    #[test]
    fn a2_double_cosets() {
        let g = a2();
        let j = NodeSet::from_iter([0]);
        let t = min_double_coset_reps(&g, j, j);
        assert_eq!(words(&g, t.reps()), ["e", "s1"]);
        let s1 = g.simple(1);
        assert_eq!(words(&g, &t.fiber(&g, s1).unwrap()), ["s1", "s1s0"]);
        let top = max_length_in_fiber(&g, s1, j, j).unwrap();
        assert_eq!(g.word_string(top), "s1s0");
        assert_eq!(g.length(top), 2);
        let s0 = g.simple(0);
        assert!(matches!(
            max_length_in_fiber(&g, s0, j, j),
            Err(ParabolicError::NotARepresentative { .. })
        ));
    }

    #[test]
    fn full_parabolic_fiber_is_identity() {
        let g = WeylGroup::from_series("B3").unwrap();
        let all = NodeSet::full(3);
        let t = min_double_coset_reps(&g, all, all);
        assert_eq!(t.reps(), &[ElemId::IDENTITY]);
        assert_eq!(t.fiber(&g, ElemId::IDENTITY).unwrap(), vec![ElemId::IDENTITY]);
        assert_eq!(max_length_in_fiber(&g, ElemId::IDENTITY, all, all).unwrap(), ElemId::IDENTITY);
    }

    #[test]
    fn tie_in_fiber_is_an_error() {
        let g = a2();
        let fake = [g.simple(0), g.simple(1)];
        assert!(matches!(
            max_of_fiber(&g, &fake),
            Err(ParabolicError::InternalConsistency(_))
        ));
    }
}
