//! Frames, orbit representatives `g w`, stabilizers and dimension estimates.

use serde::Serialize;

use super::field::FiniteField;
use super::matrix::{Mat, Pattern};
use super::orbits::GeometricCount;
use super::{pattern_points, FiniteZipError, Result, ZipShape};
use crate::parabolic::{min_coset_reps, parabolic_elements};
use crate::parallel::Execution;
use crate::rootdata::{ElemId, NodeSet, WeylGroup};

/// Permutation matrix of `w` in `W(A_{n-1}) = S_n`, `s_i` swapping `i` and
/// `i + 1`. Built letter by letter, so `(uv)^. = u^. v^.` always.
pub fn weyl_permutation(group: &WeylGroup, w: ElemId) -> Mat {
    let n = group.rank() + 1;
    let mut perm: Vec<usize> = (0..n).collect();
    for &i in group.word(w) {
        perm.swap(i as usize, i as usize + 1);
    }
    Mat::permutation(&perm)
}

/// A frame `(B_-, T, g)`: `B_-` lower triangular, `T` diagonal and `g`
/// monomial with `F_p` entries, such that `B_- ⊆ Q`, `^g B_- ⊆ P` and
/// `phi(^g B_- ∩ L) = B_- ∩ M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub g: Mat,
    /// Type of `P` relative to the frame.
    pub j: NodeSet,
    /// Type of `Q`.
    pub k: NodeSet,
    /// `psi(s) = phi(^g s)` on simple reflections of `J`.
    pub psi_pairs: Vec<(usize, usize)>,
}

fn frame_of(shape: ZipShape, g: Mat) -> Option<Frame> {
    let n = shape.n;
    let perm = g.monomial_permutation()?;
    let borel = Pattern::lower_borel(n);
    let gb = borel.conjugate(&perm);
    let levi = shape.levi_pattern();
    if !borel.is_subset(&shape.q_pattern())
        || !gb.is_subset(&shape.p_pattern())
        || gb.intersect(&levi) != borel.intersect(&levi)
    {
        return None;
    }
    let j: NodeSet = (0..n - 1).filter(|&i| levi.allows(perm[i], perm[i + 1])).collect();
    let k: NodeSet = (0..n - 1).filter(|&i| levi.allows(i, i + 1)).collect();
    let mut psi_pairs = Vec::new();
    for i in j.iter() {
        let (a, b) = (perm[i].min(perm[i + 1]), perm[i].max(perm[i + 1]));
        if b != a + 1 || !k.contains(a) {
            return None;
        }
        psi_pairs.push((i, a));
    }
    Some(Frame { g, j, k, psi_pairs })
}

/// All frames with monomial `g` over `F_p`, in lexicographic order of `g`.
pub fn find_frames(shape: ZipShape, p: u64) -> Result<Vec<Frame>> {
    let n = shape.n;
    let field = FiniteField::new(p, 1)?;
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for pre in &perms {
            for x in (0..n).filter(|x| !pre.contains(x)) {
                let mut v = pre.clone();
                v.push(x);
                next.push(v);
            }
        }
        perms = next;
    }
    let units: Vec<u16> = (1..p as u16).collect();
    let mut frames = Vec::new();
    for perm in &perms {
        let base = Mat::permutation(perm);
        let mut scalars = vec![0usize; n];
        loop {
            let scale = Mat::diagonal(&scalars.iter().map(|&k| units[k]).collect::<Vec<_>>());
            if let Some(fr) = frame_of(shape, base.mul(&scale, &field)) {
                frames.push(fr);
            }
            let Some(pos) = (0..n).rev().find(|&i| scalars[i] + 1 < units.len()) else { break };
            scalars[pos] += 1;
            scalars[pos + 1..].iter_mut().for_each(|x| *x = 0);
        }
    }
    frames.sort_by_key(|fr| fr.g.encode(p as usize));
    Ok(frames)
}

/// A frame whose translates `g w`, `w ∈ ^J W`, meet every geometric class
/// exactly once.
#[derive(Debug, Clone)]
pub struct FrameMatch {
    pub frame: Frame,
    /// `(w, class label of g w)` for `w ∈ ^J W` in (length, word) order.
    pub labels: Vec<(ElemId, u32)>,
}

/// Searches the frames in order for one that labels the geometric classes
/// bijectively by `^J W`.
pub fn match_representatives(count: &GeometricCount, group: &WeylGroup) -> Result<FrameMatch> {
    let shape = count.shape;
    let field = FiniteField::new(count.p, 1)?;
    for frame in find_frames(shape, count.p)? {
        let reps = min_coset_reps(group, frame.j);
        let labels: Vec<(ElemId, u32)> = reps
            .reps()
            .iter()
            .map(|&w| {
                let gw = frame.g.mul(&weyl_permutation(group, w), &field);
                (w, count.label_of(&gw).expect("g w is an F_p-point"))
            })
            .collect();
        let mut seen: Vec<u32> = labels.iter().map(|l| l.1).collect();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() == labels.len() && seen.len() == count.count() {
            return Ok(FrameMatch { frame, labels });
        }
    }
    Err(FiniteZipError::NoFrameFound { p: count.p, m: count.top_level() })
}

/// A pair `(y, w)` where `g (y w psi(y)^{-1})^.` and `g w^.` land in different
/// classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PsiViolation {
    pub y: String,
    pub w: String,
    pub twisted: String,
}

/// For `y ∈ W_J` the pair `(^g y, phi(^g y))` lies in `E` and moves `g w` to
/// `g y w psi(y)^{-1}` up to the torus, so with the right `psi` both points
/// share a geometric class for every `w ∈ W`. Returns the pairs where the
/// candidate `psi` breaks this.
pub fn psi_consistency(
    count: &GeometricCount,
    group: &WeylGroup,
    frame: &Frame,
    psi_pairs: &[(usize, usize)],
) -> Result<Vec<PsiViolation>> {
    let field = FiniteField::new(count.p, 1)?;
    let psi_node = |s: usize| psi_pairs.iter().find(|pr| pr.0 == s).map(|pr| pr.1);
    let label = |w: ElemId| {
        let gw = frame.g.mul(&weyl_permutation(group, w), &field);
        count.label_of(&gw).expect("g w is an F_p-point")
    };
    let mut out = Vec::new();
    for y in parabolic_elements(group, frame.j) {
        let image: Option<Vec<usize>> = group.word(y).iter().map(|&s| psi_node(s as usize)).collect();
        let image = image.ok_or_else(|| FiniteZipError::Inconsistent("psi is not defined on J".into()))?;
        let psi_y = group.from_word(&image).map_err(|e| FiniteZipError::Inconsistent(e.to_string()))?;
        let psi_y_inv = group.inverse(psi_y);
        for w in group.ids() {
            let v = group.mul(group.mul(y, w), psi_y_inv);
            if label(v) != label(w) {
                out.push(PsiViolation {
                    y: group.word_string(y),
                    w: group.word_string(w),
                    twisted: group.word_string(v),
                });
            }
        }
    }
    Ok(out)
}

/// Order of `Stab_{E(F_s)}(h)` over one field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilizerReport {
    pub m: u32,
    pub order: u128,
    /// Exponent of `p` in the order.
    pub p_valuation: u32,
}

/// `Stab_{E(F_{p^m})}(h)`: pairs `(x, h^{-1} x h)` with `x ∈ P` whose second
/// entry lies in `Q` with Levi part `phi(levi(x))`. Returns the `P`-entries.
pub fn stabilizer_points(shape: ZipShape, field: &FiniteField, h: &Mat, exec: Execution) -> Vec<Mat> {
    let h_inv = h.inverse(field).expect("h is invertible");
    let levi = shape.levi_pattern();
    let q = shape.q_pattern();
    let points = pattern_points(field, &shape.p_pattern());
    let keep = exec.map_slice(&points, |x| {
        let y = h_inv.mul(x, field).mul(h, field);
        q.contains(&y) && levi.levi_part(&y) == levi.levi_part(x).frobenius(field)
    });
    points.into_iter().zip(keep).filter_map(|(x, k)| k.then_some(x)).collect()
}

fn stabilizer_report(shape: ZipShape, p: u64, m: u32, h: &Mat, exec: Execution) -> Result<StabilizerReport> {
    let field = FiniteField::new(p, m)?;
    let stab = stabilizer_points(shape, &field, h, exec);
    let mut order = stab.len() as u128;
    let mut v = 0;
    while order % p as u128 == 0 {
        order /= p as u128;
        v += 1;
    }
    Ok(StabilizerReport { m, order: stab.len() as u128, p_valuation: v })
}

/// Orbit dimension of `h` read off the growth of its stabilizer between two
/// levels of the tower.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionEstimate {
    pub low: StabilizerReport,
    pub high: StabilizerReport,
    /// `dim E - (v_p(|Stab(F_{s'})|) - v_p(|Stab(F_s)|)) / log_p(s'/s)`.
    pub estimate: f64,
    /// `log(|orbit(F_{s'})| / |orbit(F_s)|) / log(s'/s)` with rational orbit
    /// sizes `|E(F_s)| / |Stab|`.
    pub naive_estimate: f64,
}

/// Estimates `dim E . h` from stabilizer orders over `F_{p^{m_low}}` and
/// `F_{p^{m_high}}`. Only the `p`-part is used for `estimate`: the finite
/// component group contributes a bounded prime-to-`p` factor that would
/// otherwise bias the exponent at these small field sizes.
pub fn dimension_estimate(
    shape: ZipShape,
    p: u64,
    h: &Mat,
    m_low: u32,
    m_high: u32,
    exec: Execution,
) -> Result<DimensionEstimate> {
    if m_high <= m_low {
        return Err(FiniteZipError::TowerTooShort { m_max: m_high });
    }
    let low = stabilizer_report(shape, p, m_low, h, exec)?;
    let high = stabilizer_report(shape, p, m_high, h, exec)?;
    let dm = (m_high - m_low) as f64;
    let dim_e = shape.dim_e() as f64;
    let estimate = dim_e - (high.p_valuation as f64 - low.p_valuation as f64) / dm;
    let s_low = (p as u128).pow(m_low);
    let s_high = (p as u128).pow(m_high);
    let orbit = |s: u128, stab: u128| (shape.e_order(s) as f64).ln() - (stab as f64).ln();
    let naive_estimate =
        (orbit(s_high, high.order) - orbit(s_low, low.order)) / ((s_high as f64).ln() - (s_low as f64).ln());
    Ok(DimensionEstimate { low, high, estimate, naive_estimate })
}
