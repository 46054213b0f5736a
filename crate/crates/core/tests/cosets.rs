mod common;

use std::collections::BTreeSet;

use zipstrat::parabolic::{is_double_rep, max_length_in_fiber, min_coset_reps, min_double_coset_reps};
use zipstrat::rootdata::build;
use zipstrat::{ElemId, NodeSet};

#[test]
fn coset_index_identity() {
    let tags = ["A1", "A2", "A3", "A4", "B2", "B3", "B4", "C2", "C3", "C4", "D4", "G2", "F4"];
    for tag in tags {
        let g = common::group(tag);
        for j in NodeSet::all_subsets(g.rank()) {
            // |W_J| from the Weyl group of the restricted Cartan matrix.
            let sub = g.root_system().spec().restrict(j);
            let wj = if sub.rank() == 0 { 1 } else { build(sub).unwrap().1.order() };
            let reps = min_coset_reps(&g, j);
            assert_eq!(reps.len() as u128 * wj, g.len() as u128, "{tag} {j:?}");
            let by_descents = g.ids().filter(|&w| j.iter().all(|i| !g.is_left_descent(w, i))).count();
            assert_eq!(reps.len(), by_descents, "{tag} {j:?}");
        }
    }
}

#[test]
fn coset_reps_are_coset_minima() {
    for tag in ["A3", "B3", "G2"] {
        let g = common::group(tag);
        for j in NodeSet::all_subsets(g.rank()) {
            let wj = common::parabolic_subgroup(&g, j);
            let table = min_coset_reps(&g, j);
            let expected: BTreeSet<ElemId> = g.ids().map(|w| common::min_of_left_coset(&g, &wj, w)).collect();
            assert_eq!(table.reps().iter().copied().collect::<BTreeSet<_>>(), expected);
            for w in g.ids() {
                assert_eq!(table.rep_of(w), common::min_of_left_coset(&g, &wj, w));
            }
        }
    }
}

#[test]
fn double_cosets_partition_the_group() {
    for (name, g) in common::rank_at_most_3() {
        for j in NodeSet::all_subsets(g.rank()) {
            let wj = common::parabolic_subgroup(&g, j);
            for k in NodeSet::all_subsets(g.rank()) {
                let wk = common::parabolic_subgroup(&g, k);
                let table = min_double_coset_reps(&g, j, k);
                let mut covered = vec![false; g.len()];
                let mut fibers = 0;
                for &x in table.reps() {
                    assert!(is_double_rep(&g, x, j, k));
                    let coset: BTreeSet<ElemId> =
                        wj.iter().flat_map(|&y| wk.iter().map(move |&z| (y, z))).map(|(y, z)| g.mul(g.mul(y, x), z)).collect();
                    assert_eq!(coset.iter().map(|&w| g.length(w)).min(), Some(g.length(x)), "{name}");
                    for w in &coset {
                        assert!(!covered[w.index()], "{name} {j:?} {k:?}: overlap at {}", g.word_string(*w));
                        covered[w.index()] = true;
                    }
                    fibers += table.fiber(&g, x).unwrap().len();
                }
                assert!(covered.iter().all(|&c| c), "{name} {j:?} {k:?}");
                assert_eq!(fibers, min_coset_reps(&g, j).len());
            }
        }
    }
}

#[test]
fn fiber_maxima_match_brute_force() {
    for (tag, j) in [("A2", [0usize]), ("C2", [0])] {
        let g = common::group(tag);
        let j = NodeSet::from_iter(j);
        let d = zipstrat::zipcomb::zip_datum_from_cocharacter(g.clone(), j, (0..g.rank()).collect(), 2, Default::default()).unwrap();
        let k = d.k();
        let wj = common::parabolic_subgroup(&g, j);
        let wk = common::parabolic_subgroup(&g, k);
        for &x in min_double_coset_reps(&g, j, k).reps() {
            let coset: BTreeSet<ElemId> =
                wj.iter().flat_map(|&y| wk.iter().map(move |&z| (y, z))).map(|(y, z)| g.mul(g.mul(y, x), z)).collect();
            let top = coset
                .iter()
                .copied()
                .filter(|&w| common::min_of_left_coset(&g, &wj, w) == w)
                .max_by_key(|&w| g.length(w))
                .unwrap();
            let got = max_length_in_fiber(&g, x, j, k).unwrap();
            assert_eq!(g.length(got), g.length(top), "{tag} x={}", g.word_string(x));
            assert_eq!(got, top);
        }
    }
}
