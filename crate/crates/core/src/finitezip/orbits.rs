//! Rational orbits of `E(F_s)` on `G(F_s)` by union-find, and geometric
//! orbit counts by merging along a tower of extensions.

use std::collections::BTreeMap;

use serde::Serialize;

use super::field::FiniteField;
use super::matrix::Mat;
use super::{gl_order, FiniteZipError, FiniteZipInstance, Result, ZipShape};
use crate::parallel::Execution;

const CHUNK: usize = 1 << 16;

/// One generator `(a, b)` of `E(F_s)`, acting by `g -> a g b^{-1}`; stores
/// `a` and `b^{-1}`.
#[derive(Debug, Clone, Copy)]
pub struct Generator {
    pub left: Mat,
    pub right_inv: Mat,
}

impl Generator {
    #[inline]
    fn apply(&self, g: &Mat, f: &FiniteField) -> Mat {
        self.left.mul(g, f).mul(&self.right_inv, f)
    }
}

fn gl_block_generators(field: &FiniteField, n: usize, start: usize, size: usize) -> Vec<Mat> {
    let mut gens = Vec::new();
    if size == 0 {
        return gens;
    }
    let mut diag = Mat::identity(n);
    diag.set(start, start, field.primitive_element());
    gens.push(diag);
    for a in field.prime_basis() {
        for i in start..start + size {
            for j in start..start + size {
                if i != j {
                    gens.push(Mat::elementary(n, i, j, a));
                }
            }
        }
    }
    gens
}

/// Generators of `E(F_s)`: unipotent transvections of `U` and `V` over an
/// `F_p`-basis of `F_s`, and `(l, phi(l))` for generators `l` of `L(F_s)`.
pub fn zip_generators(shape: ZipShape, field: &FiniteField) -> Vec<Generator> {
    let n = shape.n;
    let k = shape.split();
    let id = Mat::identity(n);
    let mut gens = Vec::new();
    for a in field.prime_basis() {
        for i in 0..k {
            for j in k..n {
                gens.push(Generator { left: Mat::elementary(n, i, j, a), right_inv: id });
                gens.push(Generator { left: id, right_inv: Mat::elementary(n, j, i, a) });
            }
        }
    }
    let levi = gl_block_generators(field, n, 0, k)
        .into_iter()
        .chain(gl_block_generators(field, n, k, n - k));
    for l in levi {
        let phi_inv = l.frobenius(field).inverse(field).expect("Levi generator is invertible");
        gens.push(Generator { left: l, right_inv: phi_inv });
    }
    gens
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    /// Keeps the smaller index as root.
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra < rb {
            self.parent[rb as usize] = ra;
        } else if rb < ra {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Runs union-find over all `s^{n^2}` matrix encodings. Singular matrices
/// stay singletons.
fn orbit_forest(shape: ZipShape, field: &FiniteField, cap: u128, exec: Execution) -> Result<UnionFind> {
    forest_with(shape.n, field, &zip_generators(shape, field), cap, exec)
}

fn forest_with(n: usize, field: &FiniteField, gens: &[Generator], cap: u128, exec: Execution) -> Result<UnionFind> {
    let s = field.order();
    let group_size = gl_order(n, s as u128);
    if group_size > cap {
        return Err(FiniteZipError::TooLarge { what: format!("GL_{n}(F_{s})"), size: group_size, cap });
    }
    let total = (s as u128).pow((n * n) as u32);
    if total > u32::MAX as u128 {
        return Err(FiniteZipError::TooLarge { what: "matrix encoding space".into(), size: total, cap: u32::MAX as u128 });
    }
    let total = total as usize;
    let mut uf = UnionFind::new(total);
    let mut start = 0usize;
    while start < total {
        let len = CHUNK.min(total - start);
        let images: Vec<Option<Vec<u32>>> = exec.map_range(len, |k| {
            let code = (start + k) as u64;
            let g = Mat::decode(n, s, code);
            if !g.is_invertible(field) {
                return None;
            }
            Some(gens.iter().map(|h| h.apply(&g, field).encode(s) as u32).collect())
        });
        for (k, imgs) in images.into_iter().enumerate() {
            if let Some(imgs) = imgs {
                for img in imgs {
                    uf.union((start + k) as u32, img);
                }
            }
        }
        start += len;
    }
    Ok(uf)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitClass {
    /// Lexicographically least matrix of the class.
    #[serde(serialize_with = "serialize_mat")]
    pub rep: Mat,
    pub size: usize,
}

fn serialize_mat<S: serde::Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<&[u16]> = (0..m.n()).map(|i| m.row(i)).collect();
    rows.serialize(s)
}

/// The `E(F_s)`-orbits on `G(F_s)`.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    n: usize,
    s: usize,
    classes: Vec<OrbitClass>,
    /// For each point of `G(F_s)` in encoding order, its class.
    labels: Vec<u32>,
    codes: Vec<u64>,
}

impl OrbitTable {
    pub fn classes(&self) -> &[OrbitClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Class index of an invertible matrix.
    pub fn class_of(&self, g: &Mat) -> Option<usize> {
        let code = g.encode(self.s);
        let pos = self.codes.binary_search(&code).ok()?;
        Some(self.labels[pos] as usize)
    }

    pub fn field_order(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Orbits of `E(F_{p^m})` on `G(F_{p^m})`.
pub fn zip_orbits(instance: &FiniteZipInstance) -> Result<OrbitTable> {
    zip_orbits_with(instance, Execution::default())
}

pub fn zip_orbits_with(instance: &FiniteZipInstance, exec: Execution) -> Result<OrbitTable> {
    let shape = instance.shape();
    let field = instance.field();
    let s = field.order();
    let mut uf = orbit_forest(shape, field, u128::MAX, exec)?;
    let codes: Vec<u64> = instance.g_points().iter().map(|g| g.encode(s)).collect();
    let root_of: Vec<u64> = codes.iter().map(|&c| uf.find(c as u32) as u64).collect();
    let mut sizes: BTreeMap<u64, usize> = BTreeMap::new();
    for &r in &root_of {
        *sizes.entry(r).or_default() += 1;
    }
    let roots: Vec<u64> = sizes.keys().copied().collect();
    let classes = sizes
        .iter()
        .map(|(&r, &size)| OrbitClass { rep: Mat::decode(shape.n, s, r), size })
        .collect();
    let labels = root_of.iter().map(|r| roots.binary_search(r).unwrap() as u32).collect();
    Ok(OrbitTable { n: shape.n, s, classes, labels, codes })
}

/// Classes of the `F_p`-points of `G` under `E(F_{p^m})` at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelCount {
    pub m: u32,
    pub count: usize,
}

/// Result of merging rational orbits along a tower of extensions.
#[derive(Debug, Clone)]
pub struct GeometricCount {
    pub shape: ZipShape,
    pub p: u64,
    /// Cumulative: the count at a level uses the merges of all earlier
    /// levels too, all realized over `F_{p^{lcm}}`.
    pub levels: Vec<LevelCount>,
    /// Number of `P x Q` double cosets met by `GL_n(F_p)`. These are unions
    /// of `E`-orbits, so this bounds the geometric count from below.
    pub lower_bound: usize,
    /// `GL_n(F_p)` in encoding order.
    pub base_points: Vec<Mat>,
    /// Class of each base point at the top level, numbered by first
    /// occurrence.
    pub base_labels: Vec<u32>,
}

impl GeometricCount {
    /// The count at the top level.
    pub fn count(&self) -> usize {
        self.levels.last().map_or(0, |l| l.count)
    }

    pub fn top_level(&self) -> u32 {
        self.levels.last().map_or(1, |l| l.m)
    }

    /// Whether the two largest levels agree, or the count met the lower
    /// bound (and so cannot drop further).
    pub fn is_stabilized(&self) -> bool {
        let k = self.levels.len();
        k >= 2 && (self.levels[k - 1].count == self.levels[k - 2].count || self.count() == self.lower_bound)
    }

    /// Class label of a base point at the top level.
    pub fn label_of(&self, g: &Mat) -> Option<u32> {
        self.base_points.iter().position(|b| b == g).map(|i| self.base_labels[i])
    }

    /// One base point per class, the first in encoding order.
    pub fn representatives(&self) -> Vec<Mat> {
        let mut seen = Vec::new();
        let mut reps = Vec::new();
        for (g, &l) in self.base_points.iter().zip(&self.base_labels) {
            if !seen.contains(&l) {
                seen.push(l);
                reps.push(*g);
            }
        }
        reps
    }
}

/// Whether some `(x, y) ∈ E(F)` has `x a y^{-1} = b`: for every `x ∈ P(F)`
/// put `y = b^{-1} x a` and test `y ∈ Q` with `levi(y) = phi(levi(x))`.
pub fn transporter_exists(shape: ZipShape, field: &FiniteField, a: &Mat, b: &Mat, exec: Execution) -> bool {
    let n = shape.n;
    let s = field.order() as u64;
    let Some(b_inv) = b.inverse(field) else { return false };
    let p_pat = shape.p_pattern();
    let q_pat = shape.q_pattern();
    let levi = shape.levi_pattern();
    let free: Vec<usize> = (0..n * n).filter(|&k| p_pat.allows(k / n, k % n)).collect();
    let total = s.pow(free.len() as u32);
    let chunks = total.div_ceil(CHUNK as u64) as usize;
    exec.position_first(chunks, |c| {
        let lo = c as u64 * CHUNK as u64;
        let hi = (lo + CHUNK as u64).min(total);
        (lo..hi).any(|code| {
            let mut rest = code;
            let mut x = Mat::zero(n);
            for &k in free.iter().rev() {
                x.set(k / n, k % n, (rest % s) as u16);
                rest /= s;
            }
            if !x.is_invertible(field) {
                return false;
            }
            let y = b_inv.mul(&x, field).mul(a, field);
            q_pat.contains(&y) && levi.levi_part(&y) == levi.levi_part(&x).frobenius(field)
        })
    })
    .is_some()
}

fn relabel(labels: &mut [u32]) -> usize {
    let mut first: BTreeMap<u32, u32> = BTreeMap::new();
    for l in labels.iter_mut() {
        let next = first.len() as u32;
        *l = *first.entry(*l).or_insert(next);
    }
    first.len()
}

/// Geometric `E`-orbit count for shape `(n, d)` over `F_p`. Every geometric
/// orbit is defined over `F_p` and has an `F_p`-point, so the orbits are the
/// classes of `GL_n(F_p)` under "connected by `E(F_{p^m})` for some `m`".
/// Level 1 is a union-find over `G(F_p)`; at each further divisor `m` of
/// `m_max` the surviving classes are merged by transporter tests over
/// `F_{p^m}`. A count is reported once the two largest levels agree or it
/// meets [`GeometricCount::lower_bound`]; otherwise `NonStabilized` carries
/// the per-level counts.
pub fn geometric_orbit_count(n: usize, d: usize, p: u64, m_max: u32) -> Result<GeometricCount> {
    geometric_orbit_count_with(n, d, p, m_max, super::DEFAULT_POINT_CAP, Execution::default())
}

pub fn geometric_orbit_count_with(
    n: usize,
    d: usize,
    p: u64,
    m_max: u32,
    cap: u128,
    exec: Execution,
) -> Result<GeometricCount> {
    let levels_m: Vec<u32> = (1..=m_max).filter(|m| m_max % m == 0).collect();
    if levels_m.len() < 2 {
        return Err(FiniteZipError::TowerTooShort { m_max });
    }
    let count = tower_counts(n, d, p, &levels_m, cap, exec)?;
    if !count.is_stabilized() {
        return Err(FiniteZipError::NonStabilized {
            counts: count.levels.iter().map(|l| (l.m, l.count)).collect(),
            lower_bound: count.lower_bound,
        });
    }
    Ok(count)
}

/// Cumulative per-level counts over the given extension degrees (the first
/// must be 1), without a stabilization verdict.
pub fn tower_counts(n: usize, d: usize, p: u64, levels_m: &[u32], cap: u128, exec: Execution) -> Result<GeometricCount> {
    let shape = ZipShape::new(n, d)?;
    if levels_m.first() != Some(&1) {
        return Err(FiniteZipError::TowerTooShort { m_max: levels_m.last().copied().unwrap_or(0) });
    }
    let base_field = FiniteField::new(p, 1)?;
    let base_points = super::pattern_points(&base_field, &super::Pattern::full(n));
    let mut uf = orbit_forest(shape, &base_field, cap, exec)?;
    let mut base_labels: Vec<u32> = base_points.iter().map(|g| uf.find(g.encode(p as usize) as u32)).collect();
    let mut levels = vec![LevelCount { m: 1, count: relabel(&mut base_labels) }];
    for &m in &levels_m[1..] {
        let field = FiniteField::new(p, m)?;
        // A failing transporter search walks every matrix with the support of P.
        let searched = (field.order() as u128).saturating_pow(shape.dim_p() as u32);
        if searched > cap {
            return Err(FiniteZipError::TooLarge { what: format!("transporter search over F_{}", field.order()), size: searched, cap });
        }
        let reps = GeometricCount {
            shape,
            p,
            levels: levels.clone(),
            lower_bound: 0,
            base_points: base_points.clone(),
            base_labels: base_labels.clone(),
        }
        .representatives();
        let mut merge = UnionFind::new(reps.len());
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                if merge.find(i as u32) == merge.find(j as u32) {
                    continue;
                }
                if transporter_exists(shape, &field, &reps[i], &reps[j], exec) {
                    merge.union(i as u32, j as u32);
                }
            }
        }
        for l in base_labels.iter_mut() {
            *l = merge.find(*l);
        }
        levels.push(LevelCount { m, count: relabel(&mut base_labels) });
    }
    let lower_bound = double_coset_count(shape, &base_field, &base_points, exec)?;
    Ok(GeometricCount { shape, p, levels, lower_bound, base_points, base_labels })
}

/// Number of `P(F_p) x Q(F_p)` double cosets in `GL_n(F_p)`; by the
/// rational Bruhat decomposition this is the number of `P x Q` double
/// cosets of `G`.
fn double_coset_count(shape: ZipShape, field: &FiniteField, points: &[Mat], exec: Execution) -> Result<usize> {
    let n = shape.n;
    let id = Mat::identity(n);
    let mut gens = Vec::new();
    for (pat, left) in [(shape.p_pattern(), true), (shape.q_pattern(), false)] {
        for (i, j) in pat.off_diagonal() {
            for a in field.prime_basis() {
                let x = Mat::elementary(n, i, j, a);
                gens.push(if left { Generator { left: x, right_inv: id } } else { Generator { left: id, right_inv: x } });
            }
        }
        for i in 0..n {
            let x = Mat::diagonal(&(0..n).map(|k| if k == i { field.primitive_element() } else { 1 }).collect::<Vec<_>>());
            gens.push(if left { Generator { left: x, right_inv: id } } else { Generator { left: id, right_inv: x } });
        }
    }
    let mut uf = forest_with(n, field, &gens, u128::MAX, exec)?;
    let mut roots: Vec<u32> = points.iter().map(|g| uf.find(g.encode(field.order()) as u32)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(roots.len())
}
