mod common;

use std::collections::{BTreeMap, BTreeSet};

use zipstrat::finitezip::*;
use zipstrat::parabolic::{min_coset_reps, min_double_coset_reps};
use zipstrat::Execution;

/// Product in `F_p[x]/(f)` by schoolbook multiplication and long division,
/// on base-`p` digit codes.
fn poly_mul(a: usize, b: usize, p: usize, f: &[u16]) -> usize {
    let m = f.len() - 1;
    let digits = |mut x: usize| -> Vec<usize> {
        (0..m)
            .map(|_| {
                let d = x % p;
                x /= p;
                d
            })
            .collect()
    };
    let (da, db) = (digits(a), digits(b));
    let mut prod = vec![0usize; 2 * m];
    for i in 0..m {
        for j in 0..m {
            prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
        }
    }
    for deg in (m..2 * m).rev() {
        let c = prod[deg];
        for k in 0..=m {
            prod[deg - m + k] = (prod[deg - m + k] + p * p - c * f[k] as usize % p) % p;
        }
    }
    prod[..m].iter().rev().fold(0, |acc, &d| acc * p + d)
}

#[test]
fn field_tables_match_polynomial_arithmetic() {
    for (p, m) in [(2u64, 1u32), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (5, 2), (2, 6)] {
        let f = FiniteField::new(p, m).unwrap();
        let s = f.order();
        assert_eq!(s, (p as usize).pow(m));
        for a in 0..s {
            for b in 0..s {
                let want = poly_mul(a, b, p as usize, f.modulus());
                assert_eq!(f.mul(a as u16, b as u16) as usize, want, "F_{p}^{m}: {a}*{b}");
                if a != 0 && b != 0 {
                    assert_ne!(want, 0, "F_{p}^{m}: modulus is reducible");
                }
            }
            let mut x = 1usize;
            for _ in 0..p {
                x = poly_mul(x, a, p as usize, f.modulus());
            }
            assert_eq!(f.frobenius(a as u16) as usize, x);
        }
        let fixed = (0..s as u16).filter(|&a| f.frobenius(a) == a).count();
        assert_eq!(fixed, p as usize);
        let g = f.primitive_element();
        let powers: BTreeSet<u16> = (0..s as u64 - 1).map(|e| f.pow(g, e)).collect();
        assert_eq!(powers.len(), s - 1);
    }
}

/// Cofactor expansion along the first row.
fn det_rows(rows: &[Vec<i64>]) -> i64 {
    if rows.is_empty() {
        return 1;
    }
    (0..rows.len())
        .map(|c| {
            let minor: Vec<Vec<i64>> = rows[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, &x)| x).collect())
                .collect();
            let sign = if c % 2 == 0 { 1 } else { -1 };
            sign * rows[0][c] * det_rows(&minor)
        })
        .sum()
}

fn det(a: &Mat, p: i64) -> i64 {
    let rows: Vec<Vec<i64>> = (0..a.n()).map(|i| a.row(i).iter().map(|&x| x as i64).collect()).collect();
    det_rows(&rows).rem_euclid(p)
}

#[test]
fn group_orders_match_determinant_count() {
    for (n, d, p) in [(2usize, 1usize, 2u64), (2, 1, 3), (3, 1, 2), (3, 2, 2), (3, 1, 3)] {
        let inst = build_instance(n, d, p, 1).unwrap();
        let s = p as usize;
        let total = s.pow((n * n) as u32) as u64;
        let invertible: Vec<Mat> = (0..total).map(|c| Mat::decode(n, s, c)).filter(|a| det(a, p as i64) != 0).collect();
        assert_eq!(invertible.len() as u128, gl_order(n, p as u128));
        assert_eq!(inst.g_points(), invertible.as_slice());
        let in_p = invertible.iter().filter(|a| (0..n).all(|i| (0..n).all(|j| a.get(i, j) == 0 || !(i >= n - d && j < n - d)))).count();
        assert_eq!(in_p, inst.p_points().len());
        assert_eq!(inst.e_points().len() as u128, inst.shape().e_order(p as u128));
    }
}

/// Orbits of the whole of `E(F_p)`, enumerated as pairs.
fn direct_orbits(inst: &FiniteZipInstance) -> BTreeSet<BTreeSet<Mat>> {
    let f = inst.field();
    let n = inst.n();
    let split = inst.shape().split();
    let same_block = |i: usize, j: usize| (i < split) == (j < split);
    let mut pairs = Vec::new();
    for p in inst.g_points().iter().filter(|a| (0..n).all(|i| (0..n).all(|j| a.get(i, j) == 0 || i < split || j >= split))) {
        let mut levi = *p;
        for i in 0..n {
            for j in 0..n {
                if !same_block(i, j) {
                    levi.set(i, j, 0);
                }
            }
        }
        let target = levi.frobenius(f);
        for q in inst.g_points().iter().filter(|a| (0..n).all(|i| (0..n).all(|j| a.get(i, j) == 0 || i >= split || j < split))) {
            let mut lq = *q;
            for i in 0..n {
                for j in 0..n {
                    if !same_block(i, j) {
                        lq.set(i, j, 0);
                    }
                }
            }
            if lq == target {
                pairs.push((*p, q.inverse(f).unwrap()));
            }
        }
    }
    assert_eq!(pairs.len(), inst.e_points().len());
    let mut seen = BTreeSet::new();
    let mut out = BTreeSet::new();
    for g in inst.g_points() {
        if seen.contains(g) {
            continue;
        }
        let orbit: BTreeSet<Mat> = pairs.iter().map(|(a, bi)| a.mul(g, f).mul(bi, f)).collect();
        seen.extend(orbit.iter().copied());
        out.insert(orbit);
    }
    out
}

#[test]
fn rational_orbits_match_direct_enumeration() {
    for (n, d, p, m) in [(2usize, 1usize, 2u64, 1u32), (2, 1, 3, 1), (2, 1, 2, 2), (3, 1, 2, 1), (3, 2, 2, 1)] {
        let inst = build_instance(n, d, p, m).unwrap();
        let table = zip_orbits(&inst).unwrap();
        let mut ours: BTreeMap<usize, BTreeSet<Mat>> = BTreeMap::new();
        for g in inst.g_points() {
            ours.entry(table.class_of(g).unwrap()).or_default().insert(*g);
        }
        let ours: BTreeSet<BTreeSet<Mat>> = ours.into_values().collect();
        assert_eq!(ours, direct_orbits(&inst), "({n},{d}) over F_{p}^{m}");
        for (k, c) in table.classes().iter().enumerate() {
            assert_eq!(table.class_of(&c.rep), Some(k));
            assert_eq!(inst.g_points().iter().filter(|g| table.class_of(g) == Some(k)).count(), c.size);
        }
    }
}

#[test]
fn gl2_geometric_orbits_are_labelled_by_coset_reps() {
    for p in [2u64, 3] {
        let count = geometric_orbit_count(2, 1, p, 4).unwrap();
        assert_eq!(count.count(), 2);
        let group = common::group("A1");
        let fm = match_representatives(&count, &group).unwrap();
        assert_eq!(fm.labels.len(), min_coset_reps(&group, fm.frame.j).len());
    }
}

#[test]
fn tower_counts_never_increase() {
    let c = tower_counts(3, 1, 2, &[1, 2, 3], u128::MAX, Execution::default()).unwrap();
    let counts: Vec<usize> = c.levels.iter().map(|l| l.count).collect();
    assert!(counts.windows(2).all(|w| w[1] <= w[0]));
    assert!(c.count() >= c.lower_bound);
    assert_eq!(c.lower_bound, min_double_coset_reps(&common::group("A2"), fm_j(3, 1), fm_k(3, 1)).len());
}

fn fm_j(n: usize, d: usize) -> zipstrat::NodeSet {
    find_frames(ZipShape::new(n, d).unwrap(), 2).unwrap()[0].j
}

fn fm_k(n: usize, d: usize) -> zipstrat::NodeSet {
    find_frames(ZipShape::new(n, d).unwrap(), 2).unwrap()[0].k
}

#[test]
fn frames_exist_and_fix_the_types() {
    for (n, d) in [(2usize, 1usize), (3, 1), (3, 2), (4, 1), (4, 2)] {
        let frames = find_frames(ZipShape::new(n, d).unwrap(), 2).unwrap();
        assert!(!frames.is_empty());
        let j: zipstrat::NodeSet = (0..n - 1).filter(|&i| i != n - d - 1).collect();
        let k: zipstrat::NodeSet = (0..n - 1).filter(|&i| i != d - 1).collect();
        for fr in &frames {
            assert_eq!((fr.j, fr.k), (k, j), "({n},{d})");
        }
    }
}

#[test]
fn lang_fibers_are_rational_points() {
    for m in [2u32, 3] {
        let inst = build_instance(2, 0, 2, m).unwrap();
        let r = lang_fiber_check(&inst, &Mat::identity(2), Execution::default());
        assert!(r.pass);
        assert_eq!(r.fiber_sizes, vec![6]);
        assert_eq!(r.image_size * 6, r.group_order);
        let fixed = fixed_points(&inst).unwrap();
        assert!(fixed.iter().all(|g| g.is_prime_field_point(inst.field())));
        assert_eq!(fixed.len() as u128, gl_order(2, 2));
    }
}

#[test]
fn gl2_sections() {
    let mut inst = build_instance(2, 1, 2, 1).unwrap();
    let fr = find_frames(inst.shape(), 2).unwrap().remove(0);
    inst.set_frame(fr.g);
    let group = common::group("A1");
    for &x in min_double_coset_reps(&group, fr.j, fr.k).reps() {
        let r = section_check(&inst, &weyl_permutation(&group, x), &group.word_string(x)).unwrap();
        assert!(r.pass() && r.identity_on_all_points(), "{r:?}");
    }
}

#[test]
fn gl3_section_fails_only_where_the_smaller_parabolics_share_a_radical() {
    for d in [1usize, 2] {
        let mut inst = build_instance(3, d, 2, 1).unwrap();
        let fr = find_frames(inst.shape(), 2).unwrap().remove(0);
        inst.set_frame(fr.g);
        let group = common::group("A2");
        for &x in min_double_coset_reps(&group, fr.j, fr.k).reps() {
            let xdot = weyl_permutation(&group, x);
            let r = section_check(&inst, &xdot, &group.word_string(x)).unwrap();
            assert!(r.e_surjective && r.e_is_homomorphism && r.kernel_contains_u_cap_v);
            assert_eq!((r.restricted_image_failures, r.restricted_kernel_failures), (0, 0));
            let zx = SmallerZipGroup::new(&inst, &xdot).unwrap();
            let shared = zx.p_pattern().radical_positions().iter().any(|ij| zx.q_pattern().radical_positions().contains(ij));
            assert_eq!(r.identity_on_all_points(), !shared, "{r:?}");
        }
    }
}
