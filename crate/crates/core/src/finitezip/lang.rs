//! The Lang map `g -> g x0 F(g)^{-1}` for the entrywise `p`-power Frobenius.

use std::collections::BTreeMap;

use serde::Serialize;

use super::matrix::Mat;
use super::{FiniteZipError, FiniteZipInstance, Result};
use crate::parallel::Execution;

/// Image of every point of `G(F_{p^m})`, in the instance's point order.
#[derive(Debug, Clone)]
pub struct LangTable {
    pub x0: Mat,
    pub images: Vec<Mat>,
}

pub fn lang_map(instance: &FiniteZipInstance, x0: &Mat, exec: Execution) -> LangTable {
    let f = &**instance.field();
    let images = exec.map_slice(instance.g_points(), |g| {
        let fg_inv = g.frobenius(f).inverse(f).expect("Frobenius of an invertible matrix");
        g.mul(x0, f).mul(&fg_inv, f)
    });
    LangTable { x0: *x0, images }
}

#[derive(Debug, Clone, Serialize)]
pub struct LangFiberReport {
    pub group_order: usize,
    pub image_size: usize,
    /// Distinct nonempty fiber sizes, ascending.
    pub fiber_sizes: Vec<usize>,
    /// `|G^{F'}|` for `F' = int(x0) ∘ F`, counted directly.
    pub twisted_fixed_points: usize,
    pub pass: bool,
}

/// Checks that all nonempty fibers have size `|G^{F'}|` and that
/// `|image| * |G^{F'}| = |G|`.
pub fn lang_fiber_check(instance: &FiniteZipInstance, x0: &Mat, exec: Execution) -> LangFiberReport {
    let f = &**instance.field();
    let table = lang_map(instance, x0, exec);
    let mut fibers: BTreeMap<Mat, usize> = BTreeMap::new();
    for img in &table.images {
        *fibers.entry(*img).or_default() += 1;
    }
    let mut sizes: Vec<usize> = fibers.values().copied().collect();
    sizes.sort_unstable();
    sizes.dedup();
    let x0_inv = x0.inverse(f).expect("x0 must be invertible");
    let twisted = instance
        .g_points()
        .iter()
        .filter(|h| x0.mul(&h.frobenius(f), f).mul(&x0_inv, f) == **h)
        .count();
    let group_order = instance.g_points().len();
    let pass = sizes == [twisted] && fibers.len() * twisted == group_order;
    LangFiberReport { group_order, image_size: fibers.len(), fiber_sizes: sizes, twisted_fixed_points: twisted, pass }
}

/// `G^F = {g : F(g) = g}`, verified to be a subgroup.
pub fn fixed_points(instance: &FiniteZipInstance) -> Result<Vec<Mat>> {
    let f = &**instance.field();
    let fixed: Vec<Mat> = instance.g_points().iter().copied().filter(|g| g.frobenius(f) == *g).collect();
    let set: std::collections::HashSet<Mat> = fixed.iter().copied().collect();
    let n = instance.n();
    let closed = set.contains(&Mat::identity(n))
        && fixed.iter().all(|a| set.contains(&a.inverse(f).expect("invertible")))
        && fixed.iter().all(|a| fixed.iter().all(|b| set.contains(&a.mul(b, f))));
    if !closed {
        return Err(FiniteZipError::Inconsistent("Frobenius fixed points are not a subgroup".into()));
    }
    Ok(fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finitezip::{build_instance, gl_order};

    #[test]
    fn gl2_over_f4() {
        let inst = build_instance(2, 0, 2, 2).unwrap();
        let id = Mat::identity(2);
        let table = lang_map(&inst, &id, Execution::Sequential);
        let pos = inst.g_points().iter().position(|g| *g == id).unwrap();
        assert_eq!(table.images[pos], id);
        let report = lang_fiber_check(&inst, &id, Execution::default());
        assert!(report.pass);
        assert_eq!((report.fiber_sizes.as_slice(), report.image_size), (&[6usize][..], 30));
        assert_eq!(fixed_points(&inst).unwrap().len() as u128, gl_order(2, 2));
    }

    #[test]
    fn twisted_base_point() {
        let inst = build_instance(2, 0, 2, 2).unwrap();
        let x0 = Mat::from_rows(&[&[0, 1], &[1, 1]]);
        let report = lang_fiber_check(&inst, &x0, Execution::default());
        assert!(report.pass, "{report:?}");
    }
}
