#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use zipstrat::rootdata::build;
use zipstrat::{CartanSpec, ElemId, NodeSet, WeylGroup};

pub fn group(tag: &str) -> Arc<WeylGroup> {
    WeylGroup::from_series(tag).unwrap()
}

/// Block-diagonal Cartan matrix of a product of series.
pub fn product(tags: &[&str]) -> Arc<WeylGroup> {
    let blocks: Vec<CartanSpec> = tags.iter().map(|t| CartanSpec::from_series(t).unwrap()).collect();
    let n: usize = blocks.iter().map(|b| b.rank()).sum();
    let mut a = vec![vec![0i32; n]; n];
    let mut off = 0;
    for b in &blocks {
        for i in 0..b.rank() {
            for j in 0..b.rank() {
                a[off + i][off + j] = b.entry(i, j);
            }
        }
        off += b.rank();
    }
    let (_, handle) = build(CartanSpec::from_matrix(a).unwrap()).unwrap();
    handle.enumerate().unwrap()
}

/// Every root system of rank at most 3, irreducible or not.
pub fn rank_at_most_3() -> Vec<(String, Arc<WeylGroup>)> {
    let mut out: Vec<(String, Arc<WeylGroup>)> =
        ["A1", "A2", "B2", "C2", "G2", "A3", "B3", "C3"].iter().map(|t| (t.to_string(), group(t))).collect();
    for tags in [&["A1", "A1"][..], &["A1", "A2"], &["A1", "B2"], &["A1", "G2"], &["A1", "A1", "A1"]] {
        out.push((tags.join("x"), product(tags)));
    }
    out
}

/// `u <= w` in Bruhat order as the transitive closure of `u -> u t`,
/// `t` a reflection and `l(u t) > l(u)`. Row `u` holds everything above `u`.
pub fn bruhat_closure(g: &WeylGroup) -> Vec<Vec<bool>> {
    let mut reflections = BTreeSet::new();
    for w in g.ids() {
        for i in 0..g.rank() {
            reflections.insert(g.mul(g.mul(w, g.simple(i)), g.inverse(w)));
        }
    }
    let n = g.len();
    let mut above = vec![vec![false; n]; n];
    for u in g.ids() {
        let row = &mut above[u.index()];
        row[u.index()] = true;
        let mut queue = VecDeque::from([u]);
        while let Some(v) = queue.pop_front() {
            for &t in &reflections {
                let vt = g.mul(v, t);
                if g.length(vt) > g.length(v) && !row[vt.index()] {
                    row[vt.index()] = true;
                    queue.push_back(vt);
                }
            }
        }
    }
    above
}

/// Elements of `W_J`, by closing `{e}` under the simple reflections in `J`.
pub fn parabolic_subgroup(g: &WeylGroup, j: NodeSet) -> Vec<ElemId> {
    let mut seen = BTreeSet::from([ElemId::IDENTITY]);
    let mut queue = VecDeque::from([ElemId::IDENTITY]);
    while let Some(w) = queue.pop_front() {
        for i in j.iter() {
            let v = g.right_mul(w, i);
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().collect()
}

/// Minimal-length element of each coset `W_J w`, found by scanning the coset.
pub fn min_of_left_coset(g: &WeylGroup, wj: &[ElemId], w: ElemId) -> ElemId {
    wj.iter().map(|&y| g.mul(y, w)).min_by_key(|&v| (g.length(v), v)).unwrap()
}
