//! Levi decompositions and the maps `e_x`, `f_x` relating `P ∩ ^{g x}Q` to
//! the zip group of the smaller datum `(M, P_x, Q_x, phi_x)`.

use serde::Serialize;

use super::matrix::{Mat, Pattern};
use super::{pattern_points, FiniteZipError, FiniteZipInstance, Result};

/// `p = u l` with `u` in `U = R_u P` and `l` in `L`.
pub fn levi_decompose(instance: &FiniteZipInstance, p: &Mat) -> Result<(Mat, Mat)> {
    let f = &**instance.field();
    let shape = instance.shape();
    if !shape.p_pattern().contains(p) || !p.is_invertible(f) {
        return Err(FiniteZipError::NotInGroup { group: "P", detail: format!("{p:?}") });
    }
    let l = shape.levi_pattern().levi_part(p);
    let u = p.mul(&l.inverse(f).expect("Levi part of an invertible element"), f);
    Ok((u, l))
}

fn frame_times(instance: &FiniteZipInstance, xdot: &Mat) -> Result<Mat> {
    let g = instance
        .frame()
        .ok_or_else(|| FiniteZipError::Inconsistent("instance has no frame element".into()))?;
    Ok(g.mul(xdot, instance.field()))
}

fn e_raw(instance: &FiniteZipInstance, h: &Mat, h_inv: &Mat, p: &Mat) -> Option<(Mat, Mat)> {
    let f = &**instance.field();
    let shape = instance.shape();
    let conj = h_inv.mul(p, f).mul(h, f);
    if !shape.p_pattern().contains(p) || !shape.q_pattern().contains(&conj) {
        return None;
    }
    let levi = shape.levi_pattern();
    Some((levi.levi_part(&conj), levi.levi_part(p).frobenius(f)))
}

/// `e_x(p) = (m, phi(l))` where `p = u l` and `^{x^{-1} g^{-1}}p = v m`.
pub fn e_x_map(instance: &FiniteZipInstance, xdot: &Mat, p: &Mat) -> Result<(Mat, Mat)> {
    let h = frame_times(instance, xdot)?;
    let h_inv = h.inverse(instance.field()).expect("frame and x are invertible");
    e_raw(instance, &h, &h_inv, p).ok_or_else(|| FiniteZipError::NotInIntersection(format!("{p:?}")))
}

/// `f_x(p', q') = ^{g x}p'`.
pub fn f_x_section(instance: &FiniteZipInstance, xdot: &Mat, pair: &(Mat, Mat)) -> Result<Mat> {
    let h = frame_times(instance, xdot)?;
    Ok(pair.0.conjugate_by(&h, instance.field()))
}

/// The zip group of `(M, P_x, Q_x, phi_x)` with `P_x = M ∩ ^{(g x)^{-1}}P`,
/// `Q_x = phi(L ∩ ^{g x}Q)`.
#[derive(Debug, Clone)]
pub struct SmallerZipGroup {
    h: Mat,
    px: Pattern,
    qx: Pattern,
    points: Vec<(Mat, Mat)>,
}

impl SmallerZipGroup {
    pub fn new(instance: &FiniteZipInstance, xdot: &Mat) -> Result<Self> {
        let f = &**instance.field();
        let shape = instance.shape();
        let h = frame_times(instance, xdot)?;
        let h_inv = h.inverse(f).expect("frame and x are invertible");
        let perm = h
            .monomial_permutation()
            .ok_or_else(|| FiniteZipError::Inconsistent("g x is not monomial".into()))?;
        let perm_inv = h_inv.monomial_permutation().expect("inverse of a monomial matrix");
        let m = shape.levi_pattern();
        let px = m.intersect(&shape.p_pattern().conjugate(&perm_inv));
        // phi preserves supports, so Q_x has the pattern of L ∩ ^{g x}Q.
        let qx = m.intersect(&shape.q_pattern().conjugate(&perm));
        let mut zx = SmallerZipGroup { h, px, qx, points: Vec::new() };
        let px_points = pattern_points(f, &px);
        let id = Mat::identity(shape.n);
        let qx_radical: Vec<Mat> = pattern_points(f, &qx)
            .into_iter()
            .filter(|q| qx.levi_part(q) == id)
            .collect();
        for p in &px_points {
            let target = zx.phi_x(instance, p);
            for r in &qx_radical {
                zx.points.push((*p, r.mul(&target, f)));
            }
        }
        Ok(zx)
    }

    pub fn p_pattern(&self) -> Pattern {
        self.px
    }

    pub fn q_pattern(&self) -> Pattern {
        self.qx
    }

    pub fn points(&self) -> &[(Mat, Mat)] {
        &self.points
    }

    /// The Levi image of `phi(levi_L(^{g x}p'))` in `Q_x`.
    pub fn phi_x(&self, instance: &FiniteZipInstance, p: &Mat) -> Mat {
        let f = &**instance.field();
        let conj = p.conjugate_by(&self.h, f);
        let l = instance.shape().levi_pattern().levi_part(&conj).frobenius(f);
        self.qx.levi_part(&l)
    }

    pub fn contains(&self, instance: &FiniteZipInstance, pair: &(Mat, Mat)) -> bool {
        let f = &**instance.field();
        let (p, q) = pair;
        self.px.contains(p)
            && self.qx.contains(q)
            && p.is_invertible(f)
            && q.is_invertible(f)
            && self.qx.levi_part(q) == self.phi_x(instance, &self.px.levi_part(p))
    }
}

/// Exhaustive checks of `e_x` and `f_x` for one double-coset representative.
#[derive(Debug, Clone, Serialize)]
pub struct SectionReport {
    pub x: String,
    pub intersection_size: usize,
    pub smaller_group_size: usize,
    pub f_lands_in_intersection: bool,
    pub e_lands_in_smaller_group: bool,
    pub phi_x_well_defined: bool,
    pub e_is_homomorphism: bool,
    /// `U ∩ ^{g x}V` is contained in the kernel of `e_x`.
    pub kernel_contains_u_cap_v: bool,
    pub kernel_size: usize,
    pub u_cap_v_size: usize,
    /// Pairs `(t, y)` with `t` in `M` and `y` in `Stab(t)` that were checked.
    pub stabilizer_pairs: usize,
    /// Pairs where `f_x(y)` leaves `Stab(g x t V)` or `e_x(f_x(y)) != y`.
    pub stabilizer_section_failures: usize,
    /// `e_x` maps `P ∩ ^{g x}Q` onto the smaller zip group.
    pub e_surjective: bool,
    /// Points `t` where `e_x(Stab(g x t V))` differs from `Stab(t)`.
    pub restricted_image_failures: usize,
    /// Points `t` where the kernel of the restriction is not `U ∩ ^{g x}V`.
    pub restricted_kernel_failures: usize,
    /// Points `y` of the whole smaller zip group with `e_x(f_x(y)) != y`.
    pub unrestricted_failures: usize,
    pub first_unrestricted_failure: Option<String>,
}

impl SectionReport {
    /// Every structural check holds and `f_x` is a section of `e_x` on the
    /// stabilizers.
    pub fn pass(&self) -> bool {
        self.f_lands_in_intersection
            && self.e_lands_in_smaller_group
            && self.phi_x_well_defined
            && self.e_is_homomorphism
            && self.kernel_contains_u_cap_v
            && self.e_surjective
            && self.restricted_image_failures == 0
            && self.restricted_kernel_failures == 0
            && self.stabilizer_section_failures == 0
    }

    /// `e_x ∘ f_x = id` on every point of the smaller zip group.
    pub fn identity_on_all_points(&self) -> bool {
        self.unrestricted_failures == 0
    }
}

/// Runs the `e_x` / `f_x` checks for `x` (given by its permutation matrix)
/// exhaustively over the instance's field.
pub fn section_check(instance: &FiniteZipInstance, xdot: &Mat, label: &str) -> Result<SectionReport> {
    let f = &**instance.field();
    let shape = instance.shape();
    let n = shape.n;
    let id = Mat::identity(n);
    let h = frame_times(instance, xdot)?;
    let h_inv = h.inverse(f).expect("frame and x are invertible");
    let zx = SmallerZipGroup::new(instance, xdot)?;
    let levi = shape.levi_pattern();

    let inter: Vec<(Mat, (Mat, Mat))> = instance
        .p_points()
        .iter()
        .filter_map(|p| e_raw(instance, &h, &h_inv, p).map(|e| (*p, e)))
        .collect();

    let f_lands = zx
        .points()
        .iter()
        .all(|y| e_raw(instance, &h, &h_inv, &y.0.conjugate_by(&h, f)).is_some());
    let e_lands = inter.iter().all(|(_, e)| zx.contains(instance, e));
    let phi_x_well_defined = pattern_points(f, &zx.p_pattern())
        .iter()
        .all(|p| zx.phi_x(instance, p) == zx.phi_x(instance, &zx.p_pattern().levi_part(p)));

    let stride = (inter.len() * inter.len() / 200_000).max(1);
    let e_hom = (0..inter.len() * inter.len()).step_by(stride).all(|k| {
        let (a, ea) = &inter[k / inter.len()];
        let (b, eb) = &inter[k % inter.len()];
        let ab = a.mul(b, f);
        e_raw(instance, &h, &h_inv, &ab) == Some((ea.0.mul(&eb.0, f), ea.1.mul(&eb.1, f)))
    });

    let u_cap_v: Vec<&Mat> = inter
        .iter()
        .map(|(p, _)| p)
        .filter(|p| levi.levi_part(p) == id && levi.levi_part(&h_inv.mul(p, f).mul(&h, f)) == id)
        .collect();
    let kernel_contains = u_cap_v
        .iter()
        .all(|p| e_raw(instance, &h, &h_inv, p) == Some((id, id)));
    let kernel_size = inter.iter().filter(|(_, e)| *e == (id, id)).count();

    let mut unrestricted_failures = 0;
    let mut first_unrestricted_failure = None;
    for y in zx.points() {
        let back = e_raw(instance, &h, &h_inv, &y.0.conjugate_by(&h, f));
        if back.as_ref() != Some(y) {
            unrestricted_failures += 1;
            if first_unrestricted_failure.is_none() {
                first_unrestricted_failure = Some(format!("(p', q') = {y:?} maps back to {back:?}"));
            }
        }
    }

    let mut images: Vec<&(Mat, Mat)> = inter.iter().map(|(_, e)| e).collect();
    images.sort_unstable();
    images.dedup();
    let e_surjective = images.len() == zx.points().len();

    let mut u_cap_v_sorted: Vec<Mat> = u_cap_v.iter().map(|p| **p).collect();
    u_cap_v_sorted.sort_unstable();
    let mut stabilizer_pairs = 0;
    let mut stabilizer_section_failures = 0;
    let mut restricted_image_failures = 0;
    let mut restricted_kernel_failures = 0;
    for t in instance.levi_points() {
        let ht = h.mul(&t, f);
        let ht_inv = ht.inverse(f).expect("invertible");
        let fixes = |p: &Mat| {
            let phl_inv = levi.levi_part(p).frobenius(f).inverse(f).expect("invertible");
            let moved = ht_inv.mul(p, f).mul(&ht, f).mul(&phl_inv, f);
            shape.q_pattern().contains(&moved) && levi.levi_part(&moved) == id
        };
        let mut image: Vec<(Mat, Mat)> = Vec::new();
        let mut kernel: Vec<Mat> = Vec::new();
        for (p, e) in inter.iter().filter(|(p, _)| fixes(p)) {
            image.push(*e);
            if *e == (id, id) {
                kernel.push(*p);
            }
        }
        image.sort_unstable();
        image.dedup();
        kernel.sort_unstable();
        let mut stab: Vec<(Mat, Mat)> = zx
            .points()
            .iter()
            .filter(|y| y.0.mul(&t, f).mul(&y.1.inverse(f).expect("invertible"), f) == t)
            .copied()
            .collect();
        stab.sort_unstable();
        if image != stab {
            restricted_image_failures += 1;
        }
        if kernel != u_cap_v_sorted {
            restricted_kernel_failures += 1;
        }
        for y in zx.points() {
            let qi = y.1.inverse(f).expect("invertible");
            if y.0.mul(&t, f).mul(&qi, f) != t {
                continue;
            }
            stabilizer_pairs += 1;
            let p = y.0.conjugate_by(&h, f);
            if !fixes(&p) || e_raw(instance, &h, &h_inv, &p).as_ref() != Some(y) {
                stabilizer_section_failures += 1;
            }
        }
    }

    Ok(SectionReport {
        x: label.to_string(),
        intersection_size: inter.len(),
        smaller_group_size: zx.points().len(),
        f_lands_in_intersection: f_lands,
        e_lands_in_smaller_group: e_lands,
        phi_x_well_defined,
        e_is_homomorphism: e_hom,
        kernel_contains_u_cap_v: kernel_contains,
        kernel_size,
        u_cap_v_size: u_cap_v.len(),
        e_surjective,
        restricted_image_failures,
        restricted_kernel_failures,
        stabilizer_pairs,
        stabilizer_section_failures,
        unrestricted_failures,
        first_unrestricted_failure,
    })
}
