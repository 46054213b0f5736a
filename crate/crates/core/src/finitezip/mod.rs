//! Brute-force `GL_n` oracle over small finite fields.
//!
//! The zip datum of type `(n, d)` over `F_p` is
//!
//! * `G = GL_n`, `P` block upper triangular with diagonal blocks of sizes
//!   `n - d` and `d` (the cocharacter `diag(t, .., t, 1, .., 1)` with `t`
//!   repeated `n - d` times has non-negative weights on `Lie P`);
//! * `Q` the opposite block lower triangular group (defined over `F_p`, so
//!   its Frobenius twist is itself);
//! * `L = M` the block diagonal Levi, and `phi` the entrywise `p`-th power.
//!
//! The zip group `E = {(p, q) : phi(levi(p)) = levi(q)}` acts on `G` by
//! `(p, q) . g = p g q^{-1}`. Everything here enumerates points over
//! `F_{p^m}` literally; nothing is derived from the Weyl-group side.

mod field;
mod frame;
mod lang;
mod matrix;
mod orbits;
mod section;

use std::sync::Arc;

pub use field::{FiniteField, MAX_FIELD_ORDER};
pub use frame::{
    dimension_estimate, find_frames, match_representatives, psi_consistency, stabilizer_points,
    weyl_permutation, DimensionEstimate, Frame, FrameMatch, PsiViolation, StabilizerReport,
};
pub use lang::{fixed_points, lang_fiber_check, lang_map, LangFiberReport, LangTable};
pub use matrix::{Mat, Pattern, MAX_N};
pub use orbits::{
    geometric_orbit_count, geometric_orbit_count_with, tower_counts, transporter_exists, zip_generators, zip_orbits, zip_orbits_with,
    GeometricCount, Generator, LevelCount, OrbitClass, OrbitTable,
};
pub use section::{
    e_x_map, f_x_section, levi_decompose, section_check, SectionReport, SmallerZipGroup,
};

/// Default cap on the number of group elements enumerated.
pub const DEFAULT_POINT_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FiniteZipError {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid shape: need 0 <= d <= n and 1 <= n <= 4, got n = {n}, d = {d}")]
    InvalidShape { n: usize, d: usize },
    #[error("{what} has {size} points, above the cap of {cap}")]
    TooLarge { what: String, size: u128, cap: u128 },
    #[error("orbit counts still changing at the top of the tower: {counts:?} (lower bound {lower_bound})")]
    NonStabilized { counts: Vec<(u32, usize)>, lower_bound: usize },
    #[error("tower up to m = {m_max} has fewer than two levels")]
    TowerTooShort { m_max: u32 },
    #[error("no frame element found over F_{p}^{m}")]
    NoFrameFound { p: u64, m: u32 },
    #[error("element is not in P ∩ ^(g x)Q: {0}")]
    NotInIntersection(String),
    #[error("element is not in {group}: {detail}")]
    NotInGroup { group: &'static str, detail: String },
    #[error("internal consistency error: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = FiniteZipError> = std::result::Result<T, E>;

/// `|GL_n(F_s)| = prod_{i<n} (s^n - s^i)`.
pub fn gl_order(n: usize, s: u128) -> u128 {
    let sn = s.pow(n as u32);
    (0..n).map(|i| sn - s.pow(i as u32)).product()
}

/// The shape `(n, d)` and the subgroups it determines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZipShape {
    pub n: usize,
    pub d: usize,
}

impl ZipShape {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || n > MAX_N || d > n {
            return Err(FiniteZipError::InvalidShape { n, d });
        }
        Ok(ZipShape { n, d })
    }

    /// Size of the first diagonal block.
    pub fn split(&self) -> usize {
        self.n - self.d
    }

    fn block(&self, i: usize) -> usize {
        usize::from(i >= self.split())
    }

    pub fn p_pattern(&self) -> Pattern {
        Pattern::from_fn(self.n, |i, j| self.block(i) <= self.block(j))
    }

    pub fn q_pattern(&self) -> Pattern {
        Pattern::from_fn(self.n, |i, j| self.block(i) >= self.block(j))
    }

    pub fn levi_pattern(&self) -> Pattern {
        Pattern::from_fn(self.n, |i, j| self.block(i) == self.block(j))
    }

    /// `dim P = n^2 - d(n - d)`.
    pub fn dim_p(&self) -> usize {
        self.n * self.n - self.d * self.split()
    }

    /// `dim E = dim P + dim V = n^2`.
    pub fn dim_e(&self) -> usize {
        self.n * self.n
    }

    pub fn p_order(&self, s: u128) -> u128 {
        gl_order(self.split(), s) * gl_order(self.d, s) * s.pow((self.d * self.split()) as u32)
    }

    pub fn e_order(&self, s: u128) -> u128 {
        self.p_order(s) * s.pow((self.d * self.split()) as u32)
    }
}

/// All invertible matrices in `pattern` over `field`, in encoding order.
pub(crate) fn pattern_points(field: &FiniteField, pattern: &Pattern) -> Vec<Mat> {
    let n = pattern.n();
    let s = field.order();
    let free: Vec<usize> = (0..n * n).filter(|&k| pattern.allows(k / n, k % n)).collect();
    let total = (s as u64).pow(free.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut g = Mat::zero(n);
        for &k in free.iter().rev() {
            g.set(k / n, k % n, (c % s as u64) as u16);
            c /= s as u64;
        }
        if g.is_invertible(field) {
            out.push(g);
        }
    }
    out
}

/// Explicit point sets of the zip datum of shape `(n, d)` over `F_{p^m}`.
#[derive(Debug, Clone)]
pub struct FiniteZipInstance {
    shape: ZipShape,
    field: Arc<FiniteField>,
    g_points: Vec<Mat>,
    p_points: Vec<Mat>,
    q_points: Vec<Mat>,
    v_points: Vec<Mat>,
    frame: Option<Mat>,
}

/// Enumerates `G`, `P`, `Q` and `V = R_u Q` over `F_{p^m}` and checks the
/// order formulas.
pub fn build_instance(n: usize, d: usize, p: u64, m: u32) -> Result<FiniteZipInstance> {
    build_instance_with_cap(n, d, p, m, DEFAULT_POINT_CAP)
}

pub fn build_instance_with_cap(n: usize, d: usize, p: u64, m: u32, cap: u128) -> Result<FiniteZipInstance> {
    let shape = ZipShape::new(n, d)?;
    let field = Arc::new(FiniteField::new(p, m)?);
    let s = field.order() as u128;
    let size = gl_order(n, s);
    if size > cap {
        return Err(FiniteZipError::TooLarge { what: format!("GL_{n}(F_{s})"), size, cap });
    }
    let g_points = pattern_points(&field, &Pattern::full(n));
    let p_points: Vec<Mat> = g_points.iter().copied().filter(|g| shape.p_pattern().contains(g)).collect();
    let q_points: Vec<Mat> = g_points.iter().copied().filter(|g| shape.q_pattern().contains(g)).collect();
    let levi = shape.levi_pattern();
    let v_points: Vec<Mat> = q_points.iter().copied().filter(|g| levi.levi_part(g) == Mat::identity(n)).collect();

    let inst = FiniteZipInstance { shape, field, g_points, p_points, q_points, v_points, frame: None };
    let checks = [
        ("G", inst.g_points.len() as u128, size),
        ("P", inst.p_points.len() as u128, shape.p_order(s)),
        ("Q", inst.q_points.len() as u128, shape.p_order(s)),
        ("V", inst.v_points.len() as u128, s.pow((d * shape.split()) as u32)),
    ];
    for (what, got, want) in checks {
        if got != want {
            return Err(FiniteZipError::Inconsistent(format!(
                "|{what}| = {got}, closed form gives {want}"
            )));
        }
    }
    for p in &inst.p_points {
        let (u, l) = levi_decompose(&inst, p)?;
        if u.mul(&l, &inst.field) != *p || levi.levi_part(&u) != Mat::identity(n) {
            return Err(FiniteZipError::Inconsistent(format!("Levi decomposition of {p:?}")));
        }
    }
    Ok(inst)
}

impl FiniteZipInstance {
    pub fn shape(&self) -> ZipShape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn d(&self) -> usize {
        self.shape.d
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn g_points(&self) -> &[Mat] {
        &self.g_points
    }

    pub fn p_points(&self) -> &[Mat] {
        &self.p_points
    }

    pub fn q_points(&self) -> &[Mat] {
        &self.q_points
    }

    /// Points of the unipotent radical `V` of `Q`.
    pub fn v_points(&self) -> &[Mat] {
        &self.v_points
    }

    /// Points of `U = R_u P`.
    pub fn u_points(&self) -> Vec<Mat> {
        let levi = self.shape.levi_pattern();
        let id = Mat::identity(self.n());
        self.p_points.iter().copied().filter(|g| levi.levi_part(g) == id).collect()
    }

    /// Points of the common Levi `L = M`.
    pub fn levi_points(&self) -> Vec<Mat> {
        let levi = self.shape.levi_pattern();
        self.p_points.iter().copied().filter(|g| levi.contains(g)).collect()
    }

    /// `(p, v phi(levi(p)))` for all `p` in `P`, `v` in `V`.
    pub fn e_points(&self) -> Vec<(Mat, Mat)> {
        let levi = self.shape.levi_pattern();
        let f = &*self.field;
        self.p_points
            .iter()
            .flat_map(|p| {
                let phl = levi.levi_part(p).frobenius(f);
                self.v_points.iter().map(move |v| (*p, v.mul(&phl, f)))
            })
            .collect()
    }

    /// Whether `(p, q)` lies in `E`.
    pub fn in_e(&self, p: &Mat, q: &Mat) -> bool {
        let f = &*self.field;
        let levi = self.shape.levi_pattern();
        self.shape.p_pattern().contains(p)
            && self.shape.q_pattern().contains(q)
            && p.is_invertible(f)
            && q.is_invertible(f)
            && levi.levi_part(p).frobenius(f) == levi.levi_part(q)
    }

    /// `(p, q) . g = p g q^{-1}`.
    pub fn zip_action(&self, e: &(Mat, Mat), g: &Mat) -> Mat {
        let f = &*self.field;
        let qi = e.1.inverse(f).expect("q is invertible");
        e.0.mul(g, f).mul(&qi, f)
    }

    pub fn frame(&self) -> Option<&Mat> {
        self.frame.as_ref()
    }

    pub fn set_frame(&mut self, g: Mat) {
        self.frame = Some(g);
    }
}
