//! Combinatorial zip data and the stratification layer.
//!
//! A [`CombZipDatum`] is the Weyl-group shadow `(W, J, K, psi, sigma, q)` of an
//! algebraic zip datum. Its strata are indexed by `^J W`; the closure order
//! is
//!
//! ```text
//! w' ⪯ w  <=>  exists y in W_J with  y w' psi(y)^{-1} <= w  (Bruhat order)
//! ```
//!
//! and a stratum `w` has dimension `ℓ(w)` relative to the base.

use std::collections::BTreeSet;
use std::sync::Arc;

use bitvec::vec::BitVec;
use serde::Serialize;

use crate::parabolic::{
    self, bruhat_leq, is_double_rep, left_reduce, min_coset_reps, min_double_coset_reps,
    parabolic_elements, project_double, CosetTable, ParabolicError,
};
use crate::parallel::Execution;
use crate::rootdata::{
    build, opposition_map, ElemId, NodeSet, RootDataError, Side, WeylGroup,
};

/// Exhaustive checks of `psi` on all of `W_J` are run up to this rank.
const EXHAUSTIVE_PSI_RANK: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZipError {
    #[error(transparent)]
    RootData(#[from] RootDataError),
    #[error(transparent)]
    Parabolic(#[from] ParabolicError),
    #[error("invalid psi: {0}")]
    InvalidPsi(String),
    #[error("invalid diagram automorphism: {0}")]
    InvalidSigma(String),
    #[error("{0} is not a minimal coset representative in ^J W")]
    NotAMinimalRep(String),
    #[error("the zip relation is not a partial order: {0}")]
    NotPartialOrder(String),
    #[error("sigma^{degree} does not preserve J = {j:?}")]
    SigmaDoesNotPreserveJ { degree: u32, j: NodeSet },
    #[error("internal consistency error: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = ZipError> = std::result::Result<T, E>;

/// How `psi: W_J -> W_K` is obtained from opposition and `sigma` when a datum
/// is built from a cocharacter type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiNormalization {
    /// `psi = sigma ∘ int(w_0)`.
    Opposition,
    /// `psi = sigma ∘ int(w_0 w_{0,J})`; the variant matching the frame of a
    /// zip datum `(G, P_+, P_-^{(q)}, Frobenius)` with Borel inside `Q`.
    #[default]
    TwistedOpposition,
}

/// `(W, J, K, psi, sigma, q)`.
#[derive(Clone)]
pub struct CombZipDatum {
    group: Arc<WeylGroup>,
    j: NodeSet,
    k: NodeSet,
    /// `psi_nodes[s] = psi(s)` for `s` in `J`.
    psi_nodes: Vec<Option<usize>>,
    sigma: Vec<usize>,
    q: u64,
    normalization: Option<PsiNormalization>,
    wj: Vec<ElemId>,
    /// `psi(y)^{-1}` for each `y` in `wj`.
    psi_inv: Vec<ElemId>,
    cosets: CosetTable,
}

impl std::fmt::Debug for CombZipDatum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CombZipDatum")
            .field("group", &self.group)
            .field("j", &self.j)
            .field("k", &self.k)
            .field("psi", &self.psi_pairs())
            .field("sigma", &self.sigma)
            .field("q", &self.q)
            .finish()
    }
}

fn check_sigma(group: &WeylGroup, sigma: &[usize]) -> Result<()> {
    let spec = group.root_system().spec();
    let n = spec.rank();
    let mut seen = vec![false; n];
    if sigma.len() != n || sigma.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(ZipError::InvalidSigma(format!("{sigma:?} is not a permutation of 0..{n}")));
    }
    for i in 0..n {
        for j in 0..n {
            if spec.entry(sigma[i], sigma[j]) != spec.entry(i, j) {
                return Err(ZipError::InvalidSigma(format!(
                    "{sigma:?} does not preserve the Cartan matrix"
                )));
            }
        }
    }
    Ok(())
}

impl CombZipDatum {
    /// Builds a datum from an explicit generator bijection `psi: J -> K`,
    /// given as `(s, psi(s))` pairs.
    pub fn new(
        group: Arc<WeylGroup>,
        j: NodeSet,
        k: NodeSet,
        psi: &[(usize, usize)],
        sigma: Vec<usize>,
        q: u64,
    ) -> Result<Self> {
        Self::build(group, j, k, psi, sigma, q, None)
    }

    fn build(
        group: Arc<WeylGroup>,
        j: NodeSet,
        k: NodeSet,
        psi: &[(usize, usize)],
        sigma: Vec<usize>,
        q: u64,
        normalization: Option<PsiNormalization>,
    ) -> Result<Self> {
        let rank = group.rank();
        let full = NodeSet::full(rank);
        if !j.is_subset(full) || !k.is_subset(full) {
            return Err(ZipError::InvalidPsi(format!("J={j:?} or K={k:?} out of range")));
        }
        check_sigma(&group, &sigma)?;
        let mut psi_nodes = vec![None; rank];
        for &(s, t) in psi {
            if !j.contains(s) || !k.contains(t) {
                return Err(ZipError::InvalidPsi(format!("pair ({s},{t}) is not in J x K")));
            }
            if psi_nodes[s].replace(t).is_some() {
                return Err(ZipError::InvalidPsi(format!("node {s} mapped twice")));
            }
        }
        let image: NodeSet = psi_nodes.iter().flatten().copied().collect();
        if psi.len() != j.len() || image != k || j.len() != k.len() {
            return Err(ZipError::InvalidPsi("psi is not a bijection J -> K".into()));
        }
        let spec = group.root_system().spec();
        for s in j.iter() {
            for t in j.iter() {
                let (ps, pt) = (psi_nodes[s].unwrap(), psi_nodes[t].unwrap());
                if spec.coxeter_exponent(s, t) != spec.coxeter_exponent(ps, pt) {
                    return Err(ZipError::InvalidPsi(format!(
                        "m(s{s},s{t}) differs from m(s{ps},s{pt})"
                    )));
                }
            }
        }

        let wj = parabolic_elements(&group, j);
        let psi_of = |y: ElemId| -> ElemId {
            group
                .word(y)
                .iter()
                .fold(ElemId::IDENTITY, |acc, &s| group.right_mul(acc, psi_nodes[s as usize].unwrap()))
        };
        if rank <= EXHAUSTIVE_PSI_RANK {
            let images: Vec<ElemId> = wj.iter().map(|&y| psi_of(y)).collect();
            let distinct: BTreeSet<ElemId> = images.iter().copied().collect();
            let wk = parabolic_elements(&group, k);
            if distinct.len() != wj.len() || distinct.iter().ne(wk.iter()) {
                return Err(ZipError::InvalidPsi("psi does not map W_J onto W_K".into()));
            }
            for (&y, &py) in wj.iter().zip(&images) {
                if group.length(y) != group.length(py) {
                    return Err(ZipError::InvalidPsi("psi does not preserve length".into()));
                }
                for s in j.iter() {
                    let lhs = psi_of(group.left_mul(s, y));
                    let rhs = group.left_mul(psi_nodes[s].unwrap(), py);
                    if lhs != rhs {
                        return Err(ZipError::InvalidPsi("psi is not a homomorphism".into()));
                    }
                }
            }
        }
        let psi_inv = wj.iter().map(|&y| group.inverse(psi_of(y))).collect();
        let cosets = min_coset_reps(&group, j);
        Ok(CombZipDatum {
            group,
            j,
            k,
            psi_nodes,
            sigma,
            q,
            normalization,
            wj,
            psi_inv,
            cosets,
        })
    }

    pub fn group(&self) -> &Arc<WeylGroup> {
        &self.group
    }

    pub fn j(&self) -> NodeSet {
        self.j
    }

    pub fn k(&self) -> NodeSet {
        self.k
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn normalization(&self) -> Option<PsiNormalization> {
        self.normalization
    }

    /// `(s, psi(s))` for `s` in `J`, in increasing order of `s`.
    pub fn psi_pairs(&self) -> Vec<(usize, usize)> {
        self.j.iter().map(|s| (s, self.psi_nodes[s].unwrap())).collect()
    }

    pub fn psi_node(&self, s: usize) -> Option<usize> {
        self.psi_nodes.get(s).copied().flatten()
    }

    /// `psi(y)` for `y` in `W_J`.
    pub fn psi(&self, y: ElemId) -> Option<ElemId> {
        let pos = self.wj.binary_search(&y).ok()?;
        Some(self.group.inverse(self.psi_inv[pos]))
    }

    /// Elements of `W_J`, sorted.
    pub fn wj(&self) -> &[ElemId] {
        &self.wj
    }

    /// `^J W`, sorted by (length, word).
    pub fn strata_index(&self) -> &CosetTable {
        &self.cosets
    }

    /// Order of `sigma` as a permutation.
    pub fn sigma_order(&self) -> u32 {
        let mut p: Vec<usize> = self.sigma.clone();
        let mut k = 1;
        while p.iter().enumerate().any(|(i, &x)| i != x) {
            p = p.iter().map(|&x| self.sigma[x]).collect();
            k += 1;
        }
        k
    }

    fn sigma_power(&self, e: u32) -> Vec<usize> {
        let mut p: Vec<usize> = (0..self.sigma.len()).collect();
        for _ in 0..e {
            p = p.iter().map(|&x| self.sigma[x]).collect();
        }
        p
    }

    fn require_rep(&self, w: ElemId) -> Result<()> {
        if self.cosets.contains(w) {
            Ok(())
        } else {
            Err(ZipError::NotAMinimalRep(self.group.word_string(w)))
        }
    }

    /// `{ y w psi(y)^{-1} : y in W_J }`, sorted, deduplicated.
    fn twisted_conjugates(&self, w: ElemId) -> Vec<ElemId> {
        let g = &self.group;
        let mut out: Vec<ElemId> = self
            .wj
            .iter()
            .zip(&self.psi_inv)
            .map(|(&y, &pinv)| g.mul(g.mul(y, w), pinv))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Datum attached to a cocharacter of type `J`: `K = sigma(ι(J))` and `psi`
/// as selected by `normalization`.
pub fn zip_datum_from_cocharacter(
    group: Arc<WeylGroup>,
    j: NodeSet,
    sigma: Vec<usize>,
    q: u64,
    normalization: PsiNormalization,
) -> Result<CombZipDatum> {
    check_sigma(&group, &sigma)?;
    let sys = group.root_system().clone();
    let iota = opposition_map(&sys);
    let k: NodeSet = j.iter().map(|s| sigma[iota[s]]).collect();
    let w0 = group.longest(NodeSet::full(group.rank()));
    let c = match normalization {
        PsiNormalization::Opposition => w0,
        PsiNormalization::TwistedOpposition => group.mul(w0, group.longest(j)),
    };
    let c_inv = group.inverse(c);
    let mut psi = Vec::new();
    for s in j.iter() {
        let conj = group.mul(group.mul(c, group.simple(s)), c_inv);
        let t = group.as_simple(conj).ok_or_else(|| {
            ZipError::Inconsistent(format!("conjugate of s{s} is not simple"))
        })?;
        psi.push((s, sigma[t]));
    }
    CombZipDatum::build(group, j, k, &psi, sigma, q, Some(normalization))
}

/// `w' ⪯ w`.
pub fn zip_leq(datum: &CombZipDatum, w_prime: ElemId, w: ElemId) -> Result<bool> {
    datum.require_rep(w_prime)?;
    datum.require_rep(w)?;
    let g = &datum.group;
    Ok(datum
        .twisted_conjugates(w_prime)
        .into_iter()
        .any(|t| bruhat_leq(g, t, w)))
}

pub fn stratum_dimension(group: &WeylGroup, w: ElemId) -> usize {
    group.length(w)
}

/// The full relation `⪯` on `^J W` as a bit matrix, rows indexed by the
/// smaller element.
#[derive(Debug, Clone)]
pub struct ZipRelation {
    nodes: Vec<ElemId>,
    rows: Vec<BitVec>,
}

impl ZipRelation {
    pub fn compute(datum: &CombZipDatum, exec: Execution) -> Self {
        let nodes = datum.cosets.reps().to_vec();
        let g = &datum.group;
        let rows = exec.map_range(nodes.len(), |a| {
            let conj = datum.twisted_conjugates(nodes[a]);
            let mut row = BitVec::repeat(false, nodes.len());
            for (b, &w) in nodes.iter().enumerate() {
                let lw = g.length(w);
                if conj.iter().any(|&t| g.length(t) <= lw && bruhat_leq(g, t, w)) {
                    row.set(b, true);
                }
            }
            row
        });
        ZipRelation { nodes, rows }
    }

    pub fn nodes(&self) -> &[ElemId] {
        &self.nodes
    }

    pub fn holds(&self, a: usize, b: usize) -> bool {
        self.rows[a][b]
    }

    /// Checks reflexivity, antisymmetry and transitivity; reports the first
    /// violation found.
    pub fn verify_partial_order(&self, group: &WeylGroup) -> Result<()> {
        let n = self.nodes.len();
        let name = |a: usize| group.word_string(self.nodes[a]);
        for a in 0..n {
            if !self.holds(a, a) {
                return Err(ZipError::NotPartialOrder(format!("not reflexive at {}", name(a))));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if self.holds(a, b) && self.holds(b, a) {
                    return Err(ZipError::NotPartialOrder(format!(
                        "not antisymmetric: {} and {}",
                        name(a),
                        name(b)
                    )));
                }
            }
        }
        for a in 0..n {
            for b in self.rows[a].iter_ones() {
                // row b must be contained in row a
                let mut extra = self.rows[b].clone();
                extra &= !self.rows[a].clone();
                if let Some(c) = extra.first_one() {
                    return Err(ZipError::NotPartialOrder(format!(
                        "not transitive: {} ⪯ {} ⪯ {} but not {} ⪯ {}",
                        name(a),
                        name(b),
                        name(c),
                        name(a),
                        name(c)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Cover relations `(a, b)`: `a ≺ b` with nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.nodes.len();
        let mut cols: Vec<BitVec> = vec![BitVec::repeat(false, n); n];
        for a in 0..n {
            for b in self.rows[a].iter_ones() {
                cols[b].set(a, true);
            }
        }
        let mut out = Vec::new();
        for a in 0..n {
            for b in self.rows[a].iter_ones() {
                if a == b {
                    continue;
                }
                let mut between = self.rows[a].clone();
                between &= cols[b].clone();
                between.set(a, false);
                between.set(b, false);
                if between.not_any() {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumNode {
    #[serde(skip)]
    pub id: ElemId,
    pub word: String,
    pub length: usize,
    pub dim: usize,
}

/// Closure poset of the zip stratification.
#[derive(Debug, Clone)]
pub struct StratPoset {
    nodes: Vec<StratumNode>,
    covers: Vec<(usize, usize)>,
    relation: ZipRelation,
    galois_classes: Option<Vec<Vec<usize>>>,
}

impl StratPoset {
    pub fn nodes(&self) -> &[StratumNode] {
        &self.nodes
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn relation(&self) -> &ZipRelation {
        &self.relation
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.relation.holds(a, b)
    }

    pub fn galois_classes(&self) -> Option<&[Vec<usize>]> {
        self.galois_classes.as_deref()
    }

    pub fn position(&self, w: ElemId) -> Option<usize> {
        self.relation.nodes.binary_search(&w).ok()
    }

    /// Whether the nodes are totally ordered.
    pub fn is_chain(&self) -> bool {
        let n = self.nodes.len();
        (0..n).all(|a| (0..n).all(|b| self.leq(a, b) || self.leq(b, a)))
    }
}

pub fn closure_poset(datum: &CombZipDatum) -> Result<StratPoset> {
    closure_poset_with(datum, Execution::default())
}

pub fn closure_poset_with(datum: &CombZipDatum, exec: Execution) -> Result<StratPoset> {
    let g = &datum.group;
    let relation = ZipRelation::compute(datum, exec);
    relation.verify_partial_order(g)?;
    let n = relation.nodes.len();
    // ids are sorted by length, so node 0 is e and the last node has maximal length
    let bottom = 0;
    if relation.nodes[bottom] != ElemId::IDENTITY || !(0..n).all(|b| relation.holds(bottom, b)) {
        return Err(ZipError::Inconsistent("e is not the unique minimum".into()));
    }
    let top = n - 1;
    let top_len = g.length(relation.nodes[top]);
    if n > 1 && g.length(relation.nodes[top - 1]) == top_len {
        return Err(ZipError::Inconsistent("^J W has several elements of maximal length".into()));
    }
    if !(0..n).all(|a| relation.holds(a, top)) {
        return Err(ZipError::Inconsistent(
            "the length-maximal element is not the unique maximum".into(),
        ));
    }
    let nodes = relation
        .nodes
        .iter()
        .map(|&w| StratumNode {
            id: w,
            word: g.word_string(w),
            length: g.length(w),
            dim: stratum_dimension(g, w),
        })
        .collect();
    let covers = relation.covers();
    Ok(StratPoset {
        nodes,
        covers,
        relation,
        galois_classes: None,
    })
}

pub fn cover_relations(poset: &StratPoset) -> &[(usize, usize)] {
    poset.covers()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverDrop {
    pub lower: String,
    pub upper: String,
    pub drop: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PurityReport {
    pub covers: Vec<CoverDrop>,
    pub violations: Vec<CoverDrop>,
    pub pass: bool,
}

/// Every cover of the closure order must drop dimension by exactly one.
pub fn purity_check(poset: &StratPoset) -> PurityReport {
    let covers: Vec<CoverDrop> = poset
        .covers
        .iter()
        .map(|&(a, b)| CoverDrop {
            lower: poset.nodes[a].word.clone(),
            upper: poset.nodes[b].word.clone(),
            drop: poset.nodes[b].dim as i64 - poset.nodes[a].dim as i64,
        })
        .collect();
    let violations: Vec<CoverDrop> = covers.iter().filter(|c| c.drop != 1).cloned().collect();
    PurityReport {
        pass: violations.is_empty(),
        covers,
        violations,
    }
}

/// Minimal double-coset representative `x` of `W_J w W_K`.
pub fn bruhat_projection(datum: &CombZipDatum, w: ElemId) -> Result<ElemId> {
    datum.require_rep(w)?;
    Ok(project_double(&datum.group, w, datum.j, datum.k))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BruhatStratum {
    #[serde(skip)]
    pub x: ElemId,
    pub word: String,
    /// `x^{J,K}`.
    pub top: String,
    pub dim: usize,
    pub fiber_size: usize,
}

/// Bruhat strata indexed by `^J W^K`, with dimensions `ℓ(x^{J,K})`.
pub fn bruhat_strata(datum: &CombZipDatum) -> Result<Vec<BruhatStratum>> {
    let g = &datum.group;
    let table = min_double_coset_reps(g, datum.j, datum.k);
    table
        .reps()
        .iter()
        .map(|&x| {
            let fiber = table.fiber(g, x)?;
            let top = parabolic::max_length_in_fiber(g, x, datum.j, datum.k)?;
            Ok(BruhatStratum {
                x,
                word: g.word_string(x),
                top: g.word_string(top),
                dim: g.length(top),
                fiber_size: fiber.len(),
            })
        })
        .collect()
}

/// `[x'] <= [x]`: some `sigma`-translate of `x'` projects Bruhat-below `x`.
pub fn bruhat_order_leq(datum: &CombZipDatum, x_prime: ElemId, x: ElemId) -> bool {
    let g = &datum.group;
    (0..datum.sigma_order()).any(|e| {
        let t = g.apply_diagram(x_prime, &datum.sigma_power(e));
        bruhat_leq(g, project_double(g, t, datum.j, datum.k), x)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    pub pairs_checked: usize,
    pub violations: Vec<(String, String)>,
    pub pass: bool,
}

/// `w' ⪯ w` must imply `[π(w')] <= [π(w)]` for the Bruhat projection `π`.
pub fn monotonicity_check(datum: &CombZipDatum, poset: &StratPoset) -> MonotonicityReport {
    let g = &datum.group;
    let nodes = poset.relation.nodes();
    let proj: Vec<ElemId> = nodes
        .iter()
        .map(|&w| project_double(g, w, datum.j, datum.k))
        .collect();
    let mut pairs_checked = 0;
    let mut violations = Vec::new();
    for a in 0..nodes.len() {
        for b in poset.relation.rows[a].iter_ones() {
            pairs_checked += 1;
            if !bruhat_order_leq(datum, proj[a], proj[b]) {
                violations.push((g.word_string(nodes[a]), g.word_string(nodes[b])));
            }
        }
    }
    MonotonicityReport {
        pairs_checked,
        pass: violations.is_empty(),
        violations,
    }
}

/// Orbits on `^J W` of `w -> min(W_J sigma^degree(w))`, each sorted, listed
/// by their first element.
pub fn galois_orbits(datum: &CombZipDatum, degree: u32) -> Result<Vec<Vec<ElemId>>> {
    let tau = datum.sigma_power(degree % datum.sigma_order());
    if datum.j.map(&tau) != datum.j {
        return Err(ZipError::SigmaDoesNotPreserveJ { degree, j: datum.j });
    }
    let g = &datum.group;
    let act = |w: ElemId| left_reduce(g, g.apply_diagram(w, &tau), datum.j);
    let mut seen = BTreeSet::new();
    let mut orbits = Vec::new();
    for &w in datum.cosets.reps() {
        if seen.contains(&w) {
            continue;
        }
        let mut orbit = vec![w];
        seen.insert(w);
        let mut v = act(w);
        while v != w {
            if !seen.insert(v) {
                return Err(ZipError::Inconsistent("induced action is not a permutation".into()));
            }
            orbit.push(v);
            v = act(v);
        }
        orbit.sort();
        orbits.push(orbit);
    }
    Ok(orbits)
}

/// Attaches the Galois classes of `galois_orbits` to the poset nodes.
pub fn with_galois_classes(datum: &CombZipDatum, mut poset: StratPoset, degree: u32) -> Result<StratPoset> {
    let orbits = galois_orbits(datum, degree)?;
    let classes = orbits
        .iter()
        .map(|o| o.iter().map(|&w| poset.position(w).expect("node of ^J W")).collect())
        .collect();
    poset.galois_classes = Some(classes);
    Ok(poset)
}

/// The smaller datum attached to `x` in `^J W^K`, living on `W_K`.
#[derive(Debug, Clone)]
pub struct RestrictedZipDatum {
    pub x: ElemId,
    /// Ambient node index of each local node of `W_K`.
    pub nodes: Vec<usize>,
    pub datum: CombZipDatum,
}

impl RestrictedZipDatum {
    /// Ambient element corresponding to a local element of `W_K`.
    pub fn embed(&self, ambient: &WeylGroup, local: ElemId) -> ElemId {
        self.datum
            .group
            .word(local)
            .iter()
            .fold(ElemId::IDENTITY, |acc, &s| ambient.right_mul(acc, self.nodes[s as usize]))
    }
}

/// `J_x = {t in K : x t x^{-1} in J}`, `psi_x(t) = psi(x t x^{-1})`, over the
/// Coxeter system `(W_K, K)`. The smaller datum carries the identity as its
/// diagram automorphism.
pub fn restrict_zip_datum(datum: &CombZipDatum, x: ElemId) -> Result<RestrictedZipDatum> {
    let g = &datum.group;
    if !is_double_rep(g, x, datum.j, datum.k) {
        return Err(ParabolicError::NotARepresentative {
            word: g.word_string(x),
            j: datum.j,
            k: datum.k,
        }
        .into());
    }
    let nodes: Vec<usize> = datum.k.iter().collect();
    let local = |t: usize| nodes.iter().position(|&u| u == t);
    let x_inv = g.inverse(x);
    let mut jx = NodeSet::EMPTY;
    let mut kx = NodeSet::EMPTY;
    let mut psi = Vec::new();
    for (lt, &t) in nodes.iter().enumerate() {
        let conj = g.mul(g.mul(x, g.simple(t)), x_inv);
        if let Some(s) = g.as_simple(conj).filter(|&s| datum.j.contains(s)) {
            let image = datum.psi_nodes[s].expect("s in J");
            let li = local(image).ok_or_else(|| {
                ZipError::Inconsistent(format!("psi(s{s}) = s{image} is not in K"))
            })?;
            jx.insert(lt);
            kx.insert(li);
            psi.push((lt, li));
        }
    }
    let spec = g.root_system().spec().restrict(datum.k);
    let rank = spec.rank();
    let (_, handle) = build(spec)?;
    let sub = handle.enumerate()?;
    let inner = CombZipDatum::build(sub, jx, kx, &psi, (0..rank).collect(), datum.q, None)?;
    Ok(RestrictedZipDatum {
        x,
        nodes,
        datum: inner,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecursionTerm {
    pub x: String,
    pub j_x: Vec<usize>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecursionReport {
    pub strata: usize,
    pub terms: Vec<RecursionTerm>,
    pub total: usize,
    pub pass: bool,
}

/// `|^J W|` against `sum over x in ^J W^K of |^{J_x} W_K|`.
pub fn recursion_identity(datum: &CombZipDatum) -> Result<RecursionReport> {
    let g = &datum.group;
    let table = min_double_coset_reps(g, datum.j, datum.k);
    let mut terms = Vec::new();
    for &x in table.reps() {
        let r = restrict_zip_datum(datum, x)?;
        let count = r.datum.cosets.len();
        terms.push(RecursionTerm {
            x: g.word_string(x),
            j_x: r.datum.j.iter().map(|l| r.nodes[l]).collect(),
            count,
        });
    }
    let total = terms.iter().map(|t| t.count).sum();
    let strata = datum.cosets.len();
    Ok(RecursionReport {
        strata,
        terms,
        total,
        pass: total == strata,
    })
}

/// Right descents of `w` that lie in `K` (used by reports).
pub fn right_descents_in(group: &WeylGroup, w: ElemId, k: NodeSet) -> NodeSet {
    group.descents(w, Side::Right).intersection(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(tag: &str) -> Arc<WeylGroup> {
        WeylGroup::from_series(tag).unwrap()
    }

    fn eo(tag: &str, j: &[usize], norm: PsiNormalization) -> CombZipDatum {
        let g = group(tag);
        let rank = g.rank();
        zip_datum_from_cocharacter(g, j.iter().copied().collect(), (0..rank).collect(), 2, norm).unwrap()
    }

    #[test]
    fn cocharacter_datum_examples() {
        let d = eo("A2", &[], PsiNormalization::Opposition);
        assert!(d.k().is_empty());
        assert!(d.psi_pairs().is_empty());
        let d = eo("C2", &[0], PsiNormalization::Opposition);
        assert_eq!(d.k(), NodeSet::from_iter([0]));
        let d = eo("A2", &[0], PsiNormalization::Opposition);
        assert_eq!(d.k(), NodeSet::from_iter([1]));
        assert_eq!(d.psi_pairs(), vec![(0, 1)]);
    }

    #[test]
    fn normalizations_differ_only_on_long_components() {
        for tag in ["A2", "C2", "G2", "B3"] {
            let g = group(tag);
            for j in NodeSet::all_subsets(g.rank()) {
                let a = zip_datum_from_cocharacter(g.clone(), j, (0..g.rank()).collect(), 2, PsiNormalization::Opposition).unwrap();
                let b = zip_datum_from_cocharacter(g.clone(), j, (0..g.rank()).collect(), 2, PsiNormalization::TwistedOpposition).unwrap();
                assert_eq!(a.k(), b.k());
                if j.len() <= 1 {
                    assert_eq!(a.psi_pairs(), b.psi_pairs(), "{tag} {j:?}");
                }
            }
        }
        // A3 with J = {0,1}: int(w_{0,J}) swaps the two nodes of J.
        let a = eo("A3", &[0, 1], PsiNormalization::Opposition);
        let b = eo("A3", &[0, 1], PsiNormalization::TwistedOpposition);
        assert_eq!(a.psi_pairs(), vec![(0, 2), (1, 1)]);
        assert_eq!(b.psi_pairs(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn invalid_psi_is_rejected() {
        let g = group("B2");
        // s0 and s1 generate W of type B2; mapping {0} -> {1} is fine as a
        // single generator, mapping both to themselves swapped is not.
        let bad = CombZipDatum::new(g.clone(), NodeSet::full(2), NodeSet::full(2), &[(0, 1), (1, 0)], vec![0, 1], 2);
        assert!(bad.is_ok(), "m(s0,s1) = m(s1,s0) so the swap is a Coxeter automorphism");
        let g3 = group("B3");
        let bad = CombZipDatum::new(g3, NodeSet::from_iter([0, 1]), NodeSet::from_iter([1, 2]), &[(0, 1), (1, 2)], vec![0, 1, 2], 2);
        assert!(matches!(bad, Err(ZipError::InvalidPsi(_))));
        let bad = CombZipDatum::new(g, NodeSet::from_iter([0]), NodeSet::from_iter([1]), &[], vec![0, 1], 2);
        assert!(matches!(bad, Err(ZipError::InvalidPsi(_))));
    }

    #[test]
    fn zip_leq_examples() {
        let d = eo("A1", &[], PsiNormalization::Opposition);
        let s = d.group().simple(0);
        assert!(zip_leq(&d, ElemId::IDENTITY, s).unwrap());
        assert!(!zip_leq(&d, s, ElemId::IDENTITY).unwrap());
        let d = eo("A2", &[0], PsiNormalization::Opposition);
        let s0 = d.group().simple(0);
        assert!(matches!(zip_leq(&d, s0, s0), Err(ZipError::NotAMinimalRep(_))));
        for &w in d.strata_index().reps() {
            assert!(zip_leq(&d, ElemId::IDENTITY, w).unwrap());
        }
    }

    #[test]
    fn siegel_c2_is_a_chain() {
        let d = eo("C2", &[0], PsiNormalization::Opposition);
        let p = closure_poset(&d).unwrap();
        assert_eq!(p.nodes().len(), 4);
        assert!(p.is_chain());
        let dims: Vec<usize> = p.nodes().iter().map(|n| n.dim).collect();
        assert_eq!(dims, [0, 1, 2, 3]);
        assert_eq!(p.covers(), &[(0, 1), (1, 2), (2, 3)]);
        let r = purity_check(&p);
        assert!(r.pass);
        assert_eq!(r.covers.iter().map(|c| c.drop).collect::<Vec<_>>(), [1, 1, 1]);
        let m = monotonicity_check(&d, &p);
        assert!(m.pass);
        assert_eq!(m.pairs_checked, 10);
    }

    #[test]
    fn a2_chain() {
        let d = eo("A2", &[0], PsiNormalization::Opposition);
        let p = closure_poset(&d).unwrap();
        let words: Vec<&str> = p.nodes().iter().map(|n| n.word.as_str()).collect();
        assert_eq!(words, ["e", "s1", "s1s0"]);
        assert_eq!(p.covers(), &[(0, 1), (1, 2)]);
        assert!(purity_check(&p).pass);
    }

    #[test]
    fn full_j_is_a_point() {
        let d = eo("B3", &[0, 1, 2], PsiNormalization::Opposition);
        let p = closure_poset(&d).unwrap();
        assert_eq!(p.nodes().len(), 1);
        assert!(p.covers().is_empty());
        assert!(purity_check(&p).pass);
        let strata = bruhat_strata(&d).unwrap();
        assert_eq!(strata.len(), 1);
        assert_eq!(strata[0].dim, 0);
        assert_eq!(strata[0].fiber_size, 1);
    }

    #[test]
    fn a2_bruhat_strata() {
        let d = eo("A2", &[0], PsiNormalization::Opposition);
        let strata = bruhat_strata(&d).unwrap();
        // J = {0}, K = {1}: W_J \ W / W_K has reps e and s1s0.
        let got: Vec<(&str, &str, usize)> = strata.iter().map(|s| (s.word.as_str(), s.top.as_str(), s.dim)).collect();
        assert_eq!(got, [("e", "s1", 1), ("s1s0", "s1s0", 2)]);
    }

    #[test]
    fn galois_orbits_for_a3_flip() {
        let g = group("A3");
        let d = zip_datum_from_cocharacter(g, NodeSet::EMPTY, vec![2, 1, 0], 2, PsiNormalization::Opposition).unwrap();
        let orbits = galois_orbits(&d, 1).unwrap();
        let total: usize = orbits.iter().map(|o| o.len()).sum();
        assert_eq!(total, 24);
        assert!(orbits.iter().all(|o| o.len() == 1 || o.len() == 2));
        // Brute force: fixed points of the flip are the words invariant under 0 <-> 2.
        let fixed = d.group().ids().filter(|&w| d.group().apply_diagram(w, &[2, 1, 0]) == w).count();
        assert_eq!(orbits.iter().filter(|o| o.len() == 1).count(), fixed);
        let trivial = galois_orbits(&d, 2).unwrap();
        assert!(trivial.iter().all(|o| o.len() == 1));
        let moved = zip_datum_from_cocharacter(group("A3"), NodeSet::from_iter([0]), vec![2, 1, 0], 2, PsiNormalization::Opposition).unwrap();
        assert!(matches!(galois_orbits(&moved, 1), Err(ZipError::SigmaDoesNotPreserveJ { .. })));
    }

    #[test]
    fn restriction_examples() {
        let d = eo("A2", &[0], PsiNormalization::Opposition);
        let r = restrict_zip_datum(&d, ElemId::IDENTITY).unwrap();
        assert!(r.datum.j().is_empty());
        let rep = recursion_identity(&d).unwrap();
        assert_eq!(rep.strata, 3);
        assert_eq!(rep.total, 3);
        assert!(rep.pass);
        let s0 = d.group().simple(0);
        assert!(matches!(
            restrict_zip_datum(&d, s0),
            Err(ZipError::Parabolic(ParabolicError::NotARepresentative { .. }))
        ));
        // J ⊆ K with x = e gives J_e = J ∩ K.
        let g = group("A3");
        let j = NodeSet::from_iter([0]);
        let k = NodeSet::from_iter([0, 2]);
        let d = CombZipDatum::new(g, j, NodeSet::from_iter([2]), &[(0, 2)], vec![0, 1, 2], 2).unwrap();
        let _ = k;
        let r = restrict_zip_datum(&d, ElemId::IDENTITY).unwrap();
        assert!(r.datum.j().is_empty(), "s0 is not in K = {{2}}");
    }
}
