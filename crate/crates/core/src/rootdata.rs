//! Root systems and Weyl groups of finite type.
//!
//! A [`RootSystem`] is built from a Cartan matrix `A` with the convention
//! `A[i][j] = <alpha_i^vee, alpha_j>`, so the simple reflection `s_i` acts on
//! root-lattice coordinates by `s_i(v) = v - (sum_j A[i][j] v_j) alpha_i`.
//!
//! Group elements are stored as permutations of the root list. The product
//! convention is fixed here, once: [`WeylElement::compose`]`(u, v)` is the
//! product `uv` in `W`. With `W` acting on roots from the right
//! (`alpha . w = w^{-1}(alpha)`), `u` acts first and `v` second, and a reduced
//! word of `uv` is the concatenation of reduced words of `u` and `v` whenever
//! lengths add.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;

/// Default cap on the number of group elements that may be enumerated.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

const MAX_POSITIVE_ROOTS: usize = 4096;

static NEXT_SYSTEM_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RootDataError {
    #[error("malformed Cartan matrix: {0}")]
    MalformedCartan(String),
    #[error("not of finite type: {0}")]
    NotFiniteType(String),
    #[error("elements belong to different root systems")]
    MixedRootSystems,
    #[error("simple reflection index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
}

pub type Result<T, E = RootDataError> = std::result::Result<T, E>;

/// A subset of the simple reflections, as a bitmask over node indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(u32);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn full(rank: usize) -> Self {
        assert!(rank <= 32, "rank above 32 is not supported");
        if rank == 32 {
            NodeSet(u32::MAX)
        } else {
            NodeSet((1u32 << rank) - 1)
        }
    }

    pub fn from_bits(bits: u32) -> Self {
        NodeSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < 32);
        self.0 |= 1 << i;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    /// Image under a permutation of node indices.
    pub fn map(self, perm: &[usize]) -> NodeSet {
        self.iter().map(|i| perm[i]).collect()
    }

    /// All subsets of `{0..rank-1}`, in increasing bitmask order.
    pub fn all_subsets(rank: usize) -> impl Iterator<Item = NodeSet> {
        (0..(1u32 << rank)).map(NodeSet)
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = NodeSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for NodeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Left or right side, for descents and coset representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Cartan data of finite type together with a diagram automorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanSpec {
    entries: Vec<Vec<i32>>,
    label: Option<String>,
    automorphism: Vec<usize>,
}

impl CartanSpec {
    /// Builds the Cartan matrix of a series tag such as `"A2"`, `"C3"`, `"G2"`
    /// (Bourbaki numbering, nodes counted from 0).
    pub fn from_series(tag: &str) -> Result<Self> {
        let tag = tag.trim();
        let bad = || RootDataError::MalformedCartan(format!("unknown series tag `{tag}`"));
        let mut chars = tag.chars();
        let series = chars.next().ok_or_else(bad)?.to_ascii_uppercase();
        let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
        let ok = match series {
            'A' => rank >= 1,
            'B' | 'C' => rank >= 2,
            'D' => rank >= 3,
            'E' => (6..=8).contains(&rank),
            'F' => rank == 4,
            'G' => rank == 2,
            _ => false,
        };
        if !ok || rank > 32 {
            return Err(bad());
        }
        let mut a = vec![vec![0i32; rank]; rank];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 2;
        }
        let mut link = |i: usize, j: usize, aij: i32, aji: i32| {
            a[i][j] = aij;
            a[j][i] = aji;
        };
        match series {
            'A' => (0..rank - 1).for_each(|i| link(i, i + 1, -1, -1)),
            'B' | 'C' => {
                (0..rank - 2).for_each(|i| link(i, i + 1, -1, -1));
                // B: last node short, C: last node long.
                if series == 'B' {
                    link(rank - 2, rank - 1, -1, -2);
                } else {
                    link(rank - 2, rank - 1, -2, -1);
                }
            }
            'D' => {
                (0..rank - 2).for_each(|i| link(i, i + 1, -1, -1));
                link(rank - 3, rank - 1, -1, -1);
            }
            'E' => {
                // Bourbaki: 1-3-4-5-6-..., node 2 attached to node 4.
                link(0, 2, -1, -1);
                link(1, 3, -1, -1);
                (2..rank - 1).for_each(|i| link(i, i + 1, -1, -1));
            }
            'F' => {
                link(0, 1, -1, -1);
                link(1, 2, -1, -2);
                link(2, 3, -1, -1);
            }
            'G' => link(0, 1, -1, -3),
            _ => unreachable!(),
        }
        let spec = CartanSpec {
            entries: a,
            label: Some(format!("{series}{rank}")),
            automorphism: (0..rank).collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_matrix(entries: Vec<Vec<i32>>) -> Result<Self> {
        let rank = entries.len();
        let spec = CartanSpec {
            entries,
            label: None,
            automorphism: (0..rank).collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses whitespace-separated integer rows, one row per line.
    pub fn parse_matrix(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|t| {
                        t.parse::<i32>().map_err(|_| {
                            RootDataError::MalformedCartan(format!("bad integer `{t}`"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Err(RootDataError::MalformedCartan("empty matrix".into()));
        }
        Self::from_matrix(rows)
    }

    /// Replaces the diagram automorphism (one-line notation: node `i` maps to
    /// `perm[i]`).
    pub fn with_automorphism(mut self, perm: Vec<usize>) -> Result<Self> {
        self.automorphism = perm;
        self.validate()?;
        Ok(self)
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i32>] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> i32 {
        self.entries[i][j]
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn automorphism(&self) -> &[usize] {
        &self.automorphism
    }

    /// Cartan submatrix on the nodes of `nodes`, listed in increasing order.
    /// The automorphism is restricted when it preserves `nodes`, and reset to
    /// the identity otherwise.
    pub fn restrict(&self, nodes: NodeSet) -> CartanSpec {
        let idx: Vec<usize> = nodes.iter().collect();
        let entries = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.entries[i][j]).collect())
            .collect();
        let automorphism = if nodes.map(&self.automorphism) == nodes {
            idx.iter()
                .map(|&i| idx.iter().position(|&j| j == self.automorphism[i]).unwrap())
                .collect()
        } else {
            (0..idx.len()).collect()
        };
        CartanSpec {
            entries,
            label: None,
            automorphism,
        }
    }

    /// Coxeter exponent `m(i, j)` (order of `s_i s_j`).
    pub fn coxeter_exponent(&self, i: usize, j: usize) -> u32 {
        if i == j {
            return 1;
        }
        match self.entries[i][j] * self.entries[j][i] {
            0 => 2,
            1 => 3,
            2 => 4,
            3 => 6,
            _ => 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.entries.len();
        let err = |m: String| Err(RootDataError::MalformedCartan(m));
        if n > 32 {
            return err(format!("rank {n} exceeds 32"));
        }
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != n {
                return err(format!("row {i} has {} entries, expected {n}", row.len()));
            }
            if row[i] != 2 {
                return err(format!("diagonal entry ({i},{i}) is {}, expected 2", row[i]));
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                if row[j] > 0 {
                    return err(format!("off-diagonal entry ({i},{j}) is positive"));
                }
                if (row[j] == 0) != (self.entries[j][i] == 0) {
                    return err(format!("entries ({i},{j}) and ({j},{i}) disagree on zero"));
                }
            }
        }
        let pi = &self.automorphism;
        if pi.len() != n {
            return err(format!("automorphism has length {}, expected {n}", pi.len()));
        }
        let mut seen = vec![false; n];
        for &k in pi {
            if k >= n || seen[k] {
                return err("automorphism is not a permutation".into());
            }
            seen[k] = true;
        }
        for i in 0..n {
            for j in 0..n {
                if self.entries[pi[i]][pi[j]] != self.entries[i][j] {
                    return err(format!(
                        "automorphism does not preserve entry ({i},{j})"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Roots of a finite root system in simple-root coordinates.
///
/// Positive roots occupy indices `0..N`, the negative of root `k` sits at
/// `k + N`.
pub struct RootSystem {
    id: u64,
    spec: CartanSpec,
    roots: Vec<Vec<i32>>,
    root_index: HashMap<Vec<i32>, u16>,
    reflections: Vec<Vec<u16>>,
    simple: Vec<u16>,
    n_pos: usize,
    order: u128,
}

impl fmt::Debug for RootSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RootSystem")
            .field("label", &self.spec.label)
            .field("rank", &self.rank())
            .field("positive_roots", &self.n_pos)
            .field("order", &self.order)
            .finish()
    }
}

impl RootSystem {
    pub fn new(spec: CartanSpec) -> Result<Arc<RootSystem>> {
        spec.validate()?;
        let n = spec.rank();
        let pairing = |i: usize, v: &[i32]| -> i32 { (0..n).map(|j| spec.entries[i][j] * v[j]).sum() };

        let mut positive: Vec<Vec<i32>> = Vec::new();
        let mut seen: HashMap<Vec<i32>, ()> = HashMap::new();
        let mut queue = VecDeque::new();
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            seen.insert(e.clone(), ());
            queue.push_back(e);
        }
        while let Some(beta) = queue.pop_front() {
            positive.push(beta.clone());
            if positive.len() > MAX_POSITIVE_ROOTS {
                return Err(RootDataError::NotFiniteType(format!(
                    "more than {MAX_POSITIVE_ROOTS} positive roots"
                )));
            }
            for i in 0..n {
                let c = pairing(i, &beta);
                let mut img = beta.clone();
                img[i] -= c;
                if img.iter().all(|&x| x >= 0) && img.iter().any(|&x| x > 0) && !seen.contains_key(&img) {
                    seen.insert(img.clone(), ());
                    queue.push_back(img);
                }
            }
        }
        positive.sort_by(|a, b| {
            let ha: i32 = a.iter().sum();
            let hb: i32 = b.iter().sum();
            ha.cmp(&hb).then_with(|| b.cmp(a))
        });
        let n_pos = positive.len();
        let mut roots = positive.clone();
        roots.extend(positive.iter().map(|r| r.iter().map(|x| -x).collect::<Vec<_>>()));
        let root_index: HashMap<Vec<i32>, u16> = roots
            .iter()
            .enumerate()
            .map(|(k, r)| (r.clone(), k as u16))
            .collect();

        let mut reflections = Vec::with_capacity(n);
        for i in 0..n {
            let mut table = Vec::with_capacity(roots.len());
            for r in &roots {
                let c = pairing(i, r);
                let mut img = r.clone();
                img[i] -= c;
                match root_index.get(&img) {
                    Some(&k) => table.push(k),
                    None => {
                        return Err(RootDataError::NotFiniteType(
                            "reflection does not preserve the root set".into(),
                        ))
                    }
                }
            }
            reflections.push(table);
        }
        let simple = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                root_index[&e]
            })
            .collect();

        // |W| = prod (m_i + 1), exponents read off the height distribution.
        let max_height = positive.iter().map(|r| r.iter().sum::<i32>()).max().unwrap_or(0) as usize;
        let mut per_height = vec![0usize; max_height + 2];
        for r in &positive {
            per_height[r.iter().sum::<i32>() as usize] += 1;
        }
        let mut order: u128 = 1;
        for k in 1..=max_height {
            let count = per_height[k] - per_height[k + 1];
            for _ in 0..count {
                order *= (k + 1) as u128;
            }
        }

        Ok(Arc::new(RootSystem {
            id: NEXT_SYSTEM_ID.fetch_add(1, Ordering::Relaxed),
            spec,
            roots,
            root_index,
            reflections,
            simple,
            n_pos,
            order,
        }))
    }

    pub fn spec(&self) -> &CartanSpec {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.spec.rank()
    }

    pub fn num_positive(&self) -> usize {
        self.n_pos
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn positive_roots(&self) -> &[Vec<i32>] {
        &self.roots[..self.n_pos]
    }

    pub fn root(&self, k: usize) -> &[i32] {
        &self.roots[k]
    }

    pub fn root_index(&self, coords: &[i32]) -> Option<usize> {
        self.root_index.get(coords).map(|&k| k as usize)
    }

    pub fn is_positive(&self, k: usize) -> bool {
        k < self.n_pos
    }

    pub fn simple_root(&self, i: usize) -> usize {
        self.simple[i] as usize
    }

    /// Permutation of root indices induced by `s_i`.
    pub fn reflection_table(&self, i: usize) -> &[u16] {
        &self.reflections[i]
    }

    /// Order of the Weyl group, from the exponents.
    pub fn weyl_order(&self) -> u128 {
        self.order
    }

    pub fn sigma(&self) -> &[usize] {
        &self.spec.automorphism
    }

    fn same_as(&self, other: &RootSystem) -> bool {
        self.id == other.id
    }
}

/// Builds the root system and a handle to its Weyl group.
pub fn build(spec: CartanSpec) -> Result<(Arc<RootSystem>, WeylGroupHandle)> {
    let sys = RootSystem::new(spec)?;
    let handle = WeylGroupHandle { sys: sys.clone() };
    Ok((sys, handle))
}

/// Un-enumerated Weyl group; [`WeylGroupHandle::enumerate`] materializes it.
#[derive(Debug, Clone)]
pub struct WeylGroupHandle {
    sys: Arc<RootSystem>,
}

impl WeylGroupHandle {
    pub fn order(&self) -> u128 {
        self.sys.weyl_order()
    }

    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.sys
    }

    pub fn enumerate(&self) -> Result<Arc<WeylGroup>> {
        WeylGroup::enumerate(self.sys.clone(), DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_with_cap(&self, cap: u128) -> Result<Arc<WeylGroup>> {
        WeylGroup::enumerate(self.sys.clone(), cap)
    }
}

/// A Weyl group element: its action on the root list and its canonical
/// (lexicographically least reduced) word.
#[derive(Clone)]
pub struct WeylElement {
    sys: Arc<RootSystem>,
    word: Vec<u8>,
    /// `img[k]` = index of `w(root_k)`.
    img: Arc<[u16]>,
    /// `inv[k]` = index of `w^{-1}(root_k)`.
    inv: Arc<[u16]>,
}

impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        self.sys.same_as(&other.sys) && self.img == other.img
    }
}

impl Eq for WeylElement {}

impl std::hash::Hash for WeylElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.sys.id.hash(state);
        self.img.hash(state);
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeylElement({})", format_word(&self.word))
    }
}

/// Formats a word as `s0s2s1`, or `e` for the empty word.
pub fn format_word(word: &[u8]) -> String {
    if word.is_empty() {
        "e".to_string()
    } else {
        word.iter().map(|i| format!("s{i}")).collect()
    }
}

impl WeylElement {
    pub fn identity(sys: &Arc<RootSystem>) -> Self {
        let id: Arc<[u16]> = (0..sys.num_roots() as u16).collect();
        WeylElement {
            sys: sys.clone(),
            word: Vec::new(),
            img: id.clone(),
            inv: id,
        }
    }

    pub fn simple(sys: &Arc<RootSystem>, i: usize) -> Result<Self> {
        Self::from_word(sys, &[i])
    }

    /// The product `s_{w[0]} s_{w[1]} ...` (the word need not be reduced).
    pub fn from_word(sys: &Arc<RootSystem>, word: &[usize]) -> Result<Self> {
        let rank = sys.rank();
        let mut img: Vec<u16> = (0..sys.num_roots() as u16).collect();
        let mut inv = img.clone();
        for &i in word {
            if i >= rank {
                return Err(RootDataError::IndexOutOfRange { index: i, rank });
            }
            let r = sys.reflection_table(i);
            // (w s_i)(a) = w(s_i a);  (w s_i)^{-1}(a) = s_i(w^{-1} a)
            img = r.iter().map(|&k| img[k as usize]).collect();
            for x in inv.iter_mut() {
                *x = r[*x as usize];
            }
        }
        Ok(Self::from_action(sys.clone(), img.into(), inv.into()))
    }

    fn from_action(sys: Arc<RootSystem>, img: Arc<[u16]>, inv: Arc<[u16]>) -> Self {
        let word = canonical_word(&sys, &inv);
        WeylElement { sys, word, img, inv }
    }

    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.sys
    }

    /// Canonical reduced word (lexicographically least).
    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn action(&self) -> &[u16] {
        &self.img
    }

    /// The product `self * other`; see the module docs for the convention.
    pub fn compose(&self, other: &WeylElement) -> Result<WeylElement> {
        if !self.sys.same_as(&other.sys) {
            return Err(RootDataError::MixedRootSystems);
        }
        let img: Arc<[u16]> = other.img.iter().map(|&k| self.img[k as usize]).collect();
        let inv: Arc<[u16]> = self.inv.iter().map(|&k| other.inv[k as usize]).collect();
        Ok(Self::from_action(self.sys.clone(), img, inv))
    }

    pub fn inverse(&self) -> WeylElement {
        Self::from_action(self.sys.clone(), self.inv.clone(), self.img.clone())
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    /// Inversion count: positive roots sent to negative roots.
    pub fn length(&self) -> usize {
        let n = self.sys.num_positive();
        self.img[..n].iter().filter(|&&k| k as usize >= n).count()
    }

    pub fn descents(&self, side: Side) -> NodeSet {
        let n = self.sys.num_positive();
        let table = match side {
            Side::Left => &self.inv,
            Side::Right => &self.img,
        };
        (0..self.sys.rank())
            .filter(|&i| table[self.sys.simple_root(i)] as usize >= n)
            .collect()
    }

    /// Longest element of the standard parabolic subgroup `W_J`.
    pub fn longest_element(sys: &Arc<RootSystem>, j: NodeSet) -> WeylElement {
        let mut w = WeylElement::identity(sys);
        loop {
            let desc = w.descents(Side::Left);
            match j.iter().find(|&i| i < sys.rank() && !desc.contains(i)) {
                Some(i) => {
                    w = WeylElement::simple(sys, i)
                        .and_then(|s| s.compose(&w))
                        .expect("index checked");
                }
                None => return w,
            }
        }
    }

    /// Image under the diagram automorphism stored in the Cartan data.
    pub fn apply_sigma(&self) -> WeylElement {
        self.apply_diagram(self.sys.sigma())
    }

    /// Image under an arbitrary diagram automorphism `perm`.
    pub fn apply_diagram(&self, perm: &[usize]) -> WeylElement {
        let word: Vec<usize> = self.word.iter().map(|&i| perm[i as usize]).collect();
        WeylElement::from_word(&self.sys, &word).expect("automorphism maps into range")
    }
}

/// Opposition involution `s -> w_0 s w_0` on simple reflections.
pub fn opposition(sys: &Arc<RootSystem>, i: usize) -> usize {
    let w0 = WeylElement::longest_element(sys, NodeSet::full(sys.rank()));
    let s = WeylElement::simple(sys, i).expect("index in range");
    let c = w0.compose(&s).and_then(|x| x.compose(&w0)).expect("same system");
    debug_assert_eq!(c.word.len(), 1);
    c.word[0] as usize
}

/// The opposition involution on all nodes.
pub fn opposition_map(sys: &Arc<RootSystem>) -> Vec<usize> {
    (0..sys.rank()).map(|i| opposition(sys, i)).collect()
}

fn canonical_word(sys: &RootSystem, inv: &[u16]) -> Vec<u8> {
    let n = sys.num_positive();
    let mut inv: Vec<u16> = inv.to_vec();
    let mut word = Vec::new();
    loop {
        let first = (0..sys.rank()).find(|&i| inv[sys.simple_root(i)] as usize >= n);
        match first {
            Some(i) => {
                word.push(i as u8);
                // (s_i w)^{-1}(a) = w^{-1}(s_i a)
                let r = sys.reflection_table(i);
                inv = r.iter().map(|&k| inv[k as usize]).collect();
            }
            None => return word,
        }
    }
}

/// Index of an element inside an enumerated [`WeylGroup`].
///
/// Ids are assigned in the order (length, canonical word), so comparing ids
/// compares elements in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ElemId(pub u32);

impl ElemId {
    pub const IDENTITY: ElemId = ElemId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A fully enumerated Weyl group with multiplication tables by simple
/// reflections.
pub struct WeylGroup {
    sys: Arc<RootSystem>,
    rank: usize,
    keys: HashMap<Box<[u16]>, ElemId>,
    lengths: Vec<u16>,
    words: Vec<Box<[u8]>>,
    left: Vec<u32>,
    right: Vec<u32>,
}

impl fmt::Debug for WeylGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeylGroup")
            .field("label", &self.sys.spec().label())
            .field("order", &self.len())
            .finish()
    }
}

impl WeylGroup {
    pub fn enumerate(sys: Arc<RootSystem>, cap: u128) -> Result<Arc<WeylGroup>> {
        let order = sys.weyl_order();
        if order > cap {
            return Err(RootDataError::NotFiniteType(format!(
                "group order {order} exceeds the enumeration cap {cap}"
            )));
        }
        let rank = sys.rank();
        let mut simple_imgs: Vec<u16> = (0..rank).map(|i| sys.simple_root(i) as u16).collect();
        let mut keys: HashMap<Box<[u16]>, u32> = HashMap::new();
        keys.insert(simple_imgs.clone().into_boxed_slice(), 0);
        let mut lengths = vec![0u16];
        let mut left: Vec<u32> = Vec::new();
        let mut next = 0usize;
        // BFS over the Cayley graph by left multiplication: distance = length.
        while next < lengths.len() {
            if lengths.len() as u128 > cap {
                return Err(RootDataError::NotFiniteType(format!(
                    "enumeration exceeded the cap {cap}"
                )));
            }
            let base: Vec<u16> = simple_imgs[next * rank..(next + 1) * rank].to_vec();
            for i in 0..rank {
                let r = sys.reflection_table(i);
                let img: Box<[u16]> = base.iter().map(|&k| r[k as usize]).collect();
                let id = match keys.get(&img) {
                    Some(&id) => id,
                    None => {
                        let id = lengths.len() as u32;
                        simple_imgs.extend_from_slice(&img);
                        keys.insert(img, id);
                        lengths.push(lengths[next] + 1);
                        id
                    }
                };
                left.push(id);
            }
            next += 1;
        }
        let total = lengths.len();
        if total as u128 != order {
            return Err(RootDataError::NotFiniteType(format!(
                "enumerated {total} elements but the exponents predict {order}"
            )));
        }

        // Canonical words in BFS order (lengths are nondecreasing).
        let mut words: Vec<Box<[u8]>> = vec![Box::new([]); total];
        for w in 1..total {
            let l = lengths[w];
            let i = (0..rank)
                .find(|&i| lengths[left[w * rank + i] as usize] < l)
                .expect("nonidentity element has a left descent");
            let tail = &words[left[w * rank + i] as usize];
            let mut word = Vec::with_capacity(l as usize);
            word.push(i as u8);
            word.extend_from_slice(tail);
            words[w] = word.into_boxed_slice();
        }

        // Right multiplication: (w s_i)(a_j) = w(a_j) - A[i][j] w(a_i).
        let mut right = vec![0u32; total * rank];
        let mut coords = vec![0i32; rank];
        for w in 0..total {
            let imgs = &simple_imgs[w * rank..(w + 1) * rank];
            for i in 0..rank {
                let mut key = Vec::with_capacity(rank);
                for j in 0..rank {
                    let wj = sys.root(imgs[j] as usize);
                    let wi = sys.root(imgs[i] as usize);
                    let a = sys.spec().entry(i, j);
                    for c in 0..rank {
                        coords[c] = wj[c] - a * wi[c];
                    }
                    key.push(sys.root_index(&coords).expect("image is a root") as u16);
                }
                right[w * rank + i] = keys[key.as_slice()];
            }
        }

        // Renumber by (length, word).
        let mut order_ids: Vec<u32> = (0..total as u32).collect();
        order_ids.sort_by(|&a, &b| {
            lengths[a as usize]
                .cmp(&lengths[b as usize])
                .then_with(|| words[a as usize].cmp(&words[b as usize]))
        });
        let mut new_id = vec![0u32; total];
        for (new, &old) in order_ids.iter().enumerate() {
            new_id[old as usize] = new as u32;
        }
        let remap_table = |t: &[u32]| -> Vec<u32> {
            let mut out = vec![0u32; total * rank];
            for old in 0..total {
                let n = new_id[old] as usize;
                for i in 0..rank {
                    out[n * rank + i] = new_id[t[old * rank + i] as usize];
                }
            }
            out
        };
        let left = remap_table(&left);
        let right = remap_table(&right);
        let mut new_lengths = vec![0u16; total];
        let mut new_words: Vec<Box<[u8]>> = vec![Box::new([]); total];
        for old in 0..total {
            let n = new_id[old] as usize;
            new_lengths[n] = lengths[old];
            new_words[n] = std::mem::take(&mut words[old]);
        }
        let keys = keys
            .into_iter()
            .map(|(k, v)| (k, ElemId(new_id[v as usize])))
            .collect();

        Ok(Arc::new(WeylGroup {
            sys,
            rank,
            keys,
            lengths: new_lengths,
            words: new_words,
            left,
            right,
        }))
    }

    /// Convenience: build and enumerate from a series tag.
    pub fn from_series(tag: &str) -> Result<Arc<WeylGroup>> {
        let (_, handle) = build(CartanSpec::from_series(tag)?)?;
        handle.enumerate()
    }

    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.sys
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ElemId> + '_ {
        (0..self.len() as u32).map(ElemId)
    }

    pub fn identity(&self) -> ElemId {
        ElemId::IDENTITY
    }

    pub fn length(&self, w: ElemId) -> usize {
        self.lengths[w.index()] as usize
    }

    pub fn word(&self, w: ElemId) -> &[u8] {
        &self.words[w.index()]
    }

    pub fn word_string(&self, w: ElemId) -> String {
        format_word(self.word(w))
    }

    /// `s_i * w`.
    pub fn left_mul(&self, i: usize, w: ElemId) -> ElemId {
        ElemId(self.left[w.index() * self.rank + i])
    }

    /// `w * s_i`.
    pub fn right_mul(&self, w: ElemId, i: usize) -> ElemId {
        ElemId(self.right[w.index() * self.rank + i])
    }

    pub fn simple(&self, i: usize) -> ElemId {
        self.left_mul(i, ElemId::IDENTITY)
    }

    pub fn mul(&self, a: ElemId, b: ElemId) -> ElemId {
        self.word(b)
            .iter()
            .fold(a, |acc, &i| self.right_mul(acc, i as usize))
    }

    pub fn inverse(&self, w: ElemId) -> ElemId {
        self.word(w)
            .iter()
            .fold(ElemId::IDENTITY, |acc, &i| self.left_mul(i as usize, acc))
    }

    /// Product of a (not necessarily reduced) word.
    pub fn from_word(&self, word: &[usize]) -> Result<ElemId> {
        word.iter().try_fold(ElemId::IDENTITY, |acc, &i| {
            if i >= self.rank {
                Err(RootDataError::IndexOutOfRange {
                    index: i,
                    rank: self.rank,
                })
            } else {
                Ok(self.right_mul(acc, i))
            }
        })
    }

    pub fn is_left_descent(&self, w: ElemId, i: usize) -> bool {
        self.length(self.left_mul(i, w)) < self.length(w)
    }

    pub fn is_right_descent(&self, w: ElemId, i: usize) -> bool {
        self.length(self.right_mul(w, i)) < self.length(w)
    }

    pub fn descents(&self, w: ElemId, side: Side) -> NodeSet {
        (0..self.rank)
            .filter(|&i| match side {
                Side::Left => self.is_left_descent(w, i),
                Side::Right => self.is_right_descent(w, i),
            })
            .collect()
    }

    pub fn element(&self, w: ElemId) -> WeylElement {
        let word: Vec<usize> = self.word(w).iter().map(|&i| i as usize).collect();
        WeylElement::from_word(&self.sys, &word).expect("word in range")
    }

    pub fn id_of(&self, w: &WeylElement) -> Result<ElemId> {
        if !self.sys.same_as(&w.sys) {
            return Err(RootDataError::MixedRootSystems);
        }
        let key: Vec<u16> = (0..self.rank)
            .map(|i| w.img[self.sys.simple_root(i)])
            .collect();
        Ok(self.keys[key.as_slice()])
    }

    /// Longest element of `W_J`.
    pub fn longest(&self, j: NodeSet) -> ElemId {
        let mut w = ElemId::IDENTITY;
        while let Some(i) = j.iter().find(|&i| !self.is_left_descent(w, i)) {
            w = self.left_mul(i, w);
        }
        w
    }

    /// Image of `w` under a diagram automorphism of the Cartan data.
    pub fn apply_diagram(&self, w: ElemId, perm: &[usize]) -> ElemId {
        self.word(w)
            .iter()
            .fold(ElemId::IDENTITY, |acc, &i| self.right_mul(acc, perm[i as usize]))
    }

    /// Whether `w` lies in `W_J`: every letter of a reduced word is in `J`.
    pub fn in_parabolic(&self, w: ElemId, j: NodeSet) -> bool {
        self.word(w).iter().all(|&i| j.contains(i as usize))
    }

    /// If `w` is a simple reflection, its node index.
    pub fn as_simple(&self, w: ElemId) -> Option<usize> {
        match self.word(w) {
            [i] => Some(*i as usize),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(tag: &str) -> Arc<RootSystem> {
        RootSystem::new(CartanSpec::from_series(tag).unwrap()).unwrap()
    }

    #[test]
    fn group_orders_of_small_types() {
        for (tag, order, npos) in [
            ("A1", 2, 1),
            ("A2", 6, 3),
            ("A3", 24, 6),
            ("B3", 48, 9),
            ("C2", 8, 4),
            ("G2", 12, 6),
            ("D4", 192, 12),
            ("F4", 1152, 24),
            ("E6", 51840, 36),
            ("E8", 696729600, 120),
        ] {
            let s = sys(tag);
            assert_eq!(s.weyl_order(), order, "{tag}");
            assert_eq!(s.num_positive(), npos, "{tag}");
        }
    }

    #[test]
    fn enumeration_matches_exponent_formula() {
        for tag in ["A1", "A2", "A3", "B2", "C3", "G2", "D4", "F4"] {
            let g = WeylGroup::from_series(tag).unwrap();
            assert_eq!(g.len() as u128, g.root_system().weyl_order(), "{tag}");
            let w0 = g.longest(NodeSet::full(g.rank()));
            assert_eq!(g.length(w0), g.root_system().num_positive());
        }
    }

    #[test]
    fn e8_is_built_but_not_enumerated() {
        let (_, handle) = build(CartanSpec::from_series("E8").unwrap()).unwrap();
        assert_eq!(handle.order(), 696729600);
        assert!(matches!(
            handle.enumerate(),
            Err(RootDataError::NotFiniteType(_))
        ));
    }

    #[test]
    fn malformed_cartan_is_rejected() {
        let bad = CartanSpec::from_matrix(vec![vec![2, -1], vec![0, 2]]);
        assert!(matches!(bad, Err(RootDataError::MalformedCartan(_))));
        let bad = CartanSpec::from_matrix(vec![vec![2, 1], vec![1, 2]]);
        assert!(matches!(bad, Err(RootDataError::MalformedCartan(_))));
        let bad = CartanSpec::from_series("A2")
            .unwrap()
            .with_automorphism(vec![0, 0]);
        assert!(bad.is_err());
        // C2 has no nontrivial diagram automorphism.
        let bad = CartanSpec::from_series("C2")
            .unwrap()
            .with_automorphism(vec![1, 0]);
        assert!(bad.is_err());
    }

    #[test]
    fn affine_type_hits_the_guard() {
        // Affine A1: [[2,-2],[-2,2]].
        let spec = CartanSpec::from_matrix(vec![vec![2, -2], vec![-2, 2]]).unwrap();
        assert!(matches!(
            RootSystem::new(spec),
            Err(RootDataError::NotFiniteType(_))
        ));
    }

    #[test]
    fn composition_examples() {
        let s = sys("A2");
        let e = WeylElement::identity(&s);
        let s1 = WeylElement::simple(&s, 0).unwrap();
        let s2 = WeylElement::simple(&s, 1).unwrap();
        assert_eq!(e.compose(&s1).unwrap(), s1);
        assert!(s1.compose(&s1).unwrap().is_identity());
        let p = s1.compose(&s2).unwrap();
        assert_eq!(p.length(), 2);
        assert_eq!(p.word(), &[0, 1]);
        let other = sys("A2");
        let t = WeylElement::simple(&other, 0).unwrap();
        assert_eq!(s1.compose(&t), Err(RootDataError::MixedRootSystems));
    }

    #[test]
    fn canonical_word_is_lex_least() {
        let s = sys("A2");
        // s1 s0 s1 = s0 s1 s0; lex least is 010.
        let w = WeylElement::from_word(&s, &[1, 0, 1]).unwrap();
        assert_eq!(w.word(), &[0, 1, 0]);
        assert_eq!(w.length(), 3);
    }

    #[test]
    fn longest_elements() {
        let s = sys("A2");
        let w0 = WeylElement::longest_element(&s, NodeSet::full(2));
        assert_eq!(w0.length(), 3);
        let ws1 = WeylElement::longest_element(&s, NodeSet::from_iter([0]));
        assert_eq!(ws1, WeylElement::simple(&s, 0).unwrap());
        assert!(WeylElement::longest_element(&s, NodeSet::EMPTY).is_identity());
    }

    #[test]
    fn opposition_examples() {
        assert_eq!(opposition_map(&sys("A2")), vec![1, 0]);
        assert_eq!(opposition_map(&sys("C2")), vec![0, 1]);
        assert_eq!(opposition_map(&sys("A3")), vec![2, 1, 0]);
        assert_eq!(opposition_map(&sys("D4")), vec![0, 1, 2, 3]);
        assert_eq!(opposition_map(&sys("E6")), vec![5, 1, 4, 3, 2, 0]);
    }

    #[test]
    fn sigma_identity_is_identity() {
        let s = sys("A3");
        let w = WeylElement::from_word(&s, &[0, 2, 1]).unwrap();
        assert_eq!(w.apply_sigma(), w);
    }

    #[test]
    fn descents_and_table_agree() {
        let g = WeylGroup::from_series("B3").unwrap();
        for w in g.ids() {
            let el = g.element(w);
            assert_eq!(el.length(), g.length(w));
            assert_eq!(el.word(), g.word(w));
            assert_eq!(el.descents(Side::Left), g.descents(w, Side::Left));
            assert_eq!(el.descents(Side::Right), g.descents(w, Side::Right));
            assert_eq!(g.id_of(&el).unwrap(), w);
            assert_eq!(g.mul(w, g.inverse(w)), ElemId::IDENTITY);
        }
    }

    #[test]
    fn parse_matrix_text() {
        let spec = CartanSpec::parse_matrix("2 -1\n-1 2\n").unwrap();
        assert_eq!(spec.rank(), 2);
        assert!(CartanSpec::parse_matrix("2 x\n").is_err());
    }
}
