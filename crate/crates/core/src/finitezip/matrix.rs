//! Small square matrices over a [`FiniteField`] and torus-stable subgroups
//! described by support patterns.

use super::field::FiniteField;

/// Largest matrix size supported.
pub const MAX_N: usize = 4;

/// An `n x n` matrix, `n <= 4`, entries row-major.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat {
    n: u8,
    e: [u16; MAX_N * MAX_N],
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<&[u16]> = (0..self.n()).map(|i| self.row(i)).collect();
        write!(f, "{rows:?}")
    }
}

impl Mat {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_N && n > 0, "matrix size {n} unsupported");
        Mat { n: n as u8, e: [0; MAX_N * MAX_N] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[&[u16]]) -> Self {
        let mut m = Mat::zero(rows.len());
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), rows.len());
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    /// The permutation matrix sending `e_j` to `e_{perm[j]}`.
    pub fn permutation(perm: &[usize]) -> Self {
        let mut m = Mat::zero(perm.len());
        for (j, &i) in perm.iter().enumerate() {
            m.set(i, j, 1);
        }
        m
    }

    /// `I + a E_{ij}`.
    pub fn elementary(n: usize, i: usize, j: usize, a: u16) -> Self {
        let mut m = Mat::identity(n);
        m.set(i, j, a);
        m
    }

    pub fn diagonal(entries: &[u16]) -> Self {
        let mut m = Mat::zero(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.e[i * self.n() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u16) {
        let n = self.n();
        self.e[i * n + j] = x;
    }

    pub fn row(&self, i: usize) -> &[u16] {
        let n = self.n();
        &self.e[i * n..(i + 1) * n]
    }

    pub fn entries(&self) -> &[u16] {
        &self.e[..self.n() * self.n()]
    }

    /// Index of the matrix among all `s^{n^2}` matrices, most significant
    /// entry first, so that index order is lexicographic order.
    #[inline]
    pub fn encode(&self, s: usize) -> u64 {
        self.entries().iter().fold(0u64, |acc, &x| acc * s as u64 + x as u64)
    }

    #[inline]
    pub fn decode(n: usize, s: usize, mut code: u64) -> Self {
        let mut m = Mat::zero(n);
        for k in (0..n * n).rev() {
            m.e[k] = (code % s as u64) as u16;
            code /= s as u64;
        }
        m
    }

    pub fn mul(&self, other: &Mat, f: &FiniteField) -> Mat {
        let n = self.n();
        debug_assert_eq!(n, other.n());
        let mut out = Mat::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u16;
                for k in 0..n {
                    let a = self.e[i * n + k];
                    if a != 0 {
                        acc = f.add(acc, f.mul(a, other.e[k * n + j]));
                    }
                }
                out.e[i * n + j] = acc;
            }
        }
        out
    }

    pub fn frobenius(&self, f: &FiniteField) -> Mat {
        let mut out = *self;
        for x in out.e[..self.n() * self.n()].iter_mut() {
            *x = f.frobenius(*x);
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination, `None` if singular.
    pub fn inverse(&self, f: &FiniteField) -> Option<Mat> {
        let n = self.n();
        let mut a = *self;
        let mut b = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col) != 0)?;
            if pivot != col {
                for j in 0..n {
                    a.e.swap(pivot * n + j, col * n + j);
                    b.e.swap(pivot * n + j, col * n + j);
                }
            }
            let scale = f.inv(a.get(col, col));
            for j in 0..n {
                a.set(col, j, f.mul(a.get(col, j), scale));
                b.set(col, j, f.mul(b.get(col, j), scale));
            }
            for r in 0..n {
                let c = a.get(r, col);
                if r == col || c == 0 {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, f.sub(a.get(r, j), f.mul(c, a.get(col, j))));
                    b.set(r, j, f.sub(b.get(r, j), f.mul(c, b.get(col, j))));
                }
            }
        }
        Some(b)
    }

    pub fn is_invertible(&self, f: &FiniteField) -> bool {
        match self.n() {
            1 => self.e[0] != 0,
            2 => f.mul(self.e[0], self.e[3]) != f.mul(self.e[1], self.e[2]),
            _ => self.inverse(f).is_some(),
        }
    }

    /// `x g x^{-1}`.
    pub fn conjugate_by(&self, x: &Mat, f: &FiniteField) -> Mat {
        let xi = x.inverse(f).expect("conjugating element must be invertible");
        x.mul(self, f).mul(&xi, f)
    }

    /// Whether all entries lie in the prime field.
    pub fn is_prime_field_point(&self, f: &FiniteField) -> bool {
        self.entries().iter().all(|&x| f.is_prime_field_element(x))
    }

    /// For a monomial matrix, the permutation `j -> i` of its nonzero entries.
    pub fn monomial_permutation(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut perm = vec![usize::MAX; n];
        for j in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&i| self.get(i, j) != 0).collect();
            if rows.len() != 1 {
                return None;
            }
            perm[j] = rows[0];
        }
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        (seen.len() == n).then_some(perm)
    }
}

/// A torus-stable subgroup of `GL_n`, given by the positions its elements may
/// occupy. The diagonal is always allowed.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pattern {
    n: u8,
    bits: u16,
}

impl std::fmt::Debug for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = self.n();
        let rows: Vec<String> = (0..n)
            .map(|i| (0..n).map(|j| if self.allows(i, j) { '*' } else { '.' }).collect())
            .collect();
        write!(f, "{}", rows.join("/"))
    }
}

impl Pattern {
    pub fn from_fn(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = 0u16;
        for i in 0..n {
            for j in 0..n {
                if i == j || allowed(i, j) {
                    bits |= 1 << (i * n + j);
                }
            }
        }
        Pattern { n: n as u8, bits }
    }

    pub fn full(n: usize) -> Self {
        Pattern::from_fn(n, |_, _| true)
    }

    pub fn torus(n: usize) -> Self {
        Pattern::from_fn(n, |_, _| false)
    }

    pub fn lower_borel(n: usize) -> Self {
        Pattern::from_fn(n, |i, j| i >= j)
    }

    pub fn upper_borel(n: usize) -> Self {
        Pattern::from_fn(n, |i, j| i <= j)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.bits & (1 << (i * self.n() + j)) != 0
    }

    pub fn intersect(&self, other: &Pattern) -> Pattern {
        Pattern { n: self.n, bits: self.bits & other.bits }
    }

    pub fn is_subset(&self, other: &Pattern) -> bool {
        self.bits & !other.bits == 0
    }

    /// Positions `(i, j)` with `(j, i)` also allowed.
    pub fn levi(&self) -> Pattern {
        Pattern::from_fn(self.n(), |i, j| self.allows(i, j) && self.allows(j, i))
    }

    /// Off-diagonal positions whose transpose is not allowed.
    pub fn radical_positions(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.allows(i, j) && !self.allows(j, i))
            .collect()
    }

    /// Off-diagonal allowed positions.
    pub fn off_diagonal(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.allows(i, j))
            .collect()
    }

    /// The pattern of `x S x^{-1}` for a monomial `x` with permutation
    /// `perm` (as returned by [`Mat::monomial_permutation`]).
    pub fn conjugate(&self, perm: &[usize]) -> Pattern {
        let n = self.n();
        let mut bits = 0u16;
        for i in 0..n {
            for j in 0..n {
                if self.allows(i, j) {
                    bits |= 1 << (perm[i] * n + perm[j]);
                }
            }
        }
        Pattern { n: self.n, bits }
    }

    /// Whether the allowed positions are closed under composition, i.e.
    /// the pattern describes a subgroup.
    pub fn is_closed(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| {
            (0..n).all(|j| {
                !self.allows(i, j) || (0..n).all(|k| !self.allows(j, k) || self.allows(i, k))
            })
        })
    }

    /// Whether the pattern contains a Borel subgroup (closed and, for each
    /// pair, one of the two positions allowed).
    pub fn is_parabolic(&self) -> bool {
        let n = self.n();
        self.is_closed() && (0..n).all(|i| (0..n).all(|j| self.allows(i, j) || self.allows(j, i)))
    }

    pub fn contains(&self, g: &Mat) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| self.allows(i, j) || g.get(i, j) == 0))
    }

    /// Zeroes the positions outside the Levi part. For a parabolic pattern
    /// this is the projection onto the Levi factor containing the torus.
    pub fn levi_part(&self, g: &Mat) -> Mat {
        let levi = self.levi();
        let mut out = *g;
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                if !levi.allows(i, j) {
                    out.set(i, j, 0);
                }
            }
        }
        out
    }

    pub fn radical_dim(&self) -> usize {
        self.radical_positions().len()
    }

    pub fn dim(&self) -> usize {
        self.bits.count_ones() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_round_trips_and_orders_lexicographically() {
        let a = Mat::from_rows(&[&[0, 1], &[1, 0]]);
        let b = Mat::from_rows(&[&[1, 0], &[0, 1]]);
        assert!(a.encode(3) < b.encode(3));
        assert_eq!(Mat::decode(2, 3, b.encode(3)), b);
    }

    #[test]
    fn inverse_over_f4() {
        let f = FiniteField::new(2, 2).unwrap();
        let g = Mat::from_rows(&[&[2, 1], &[3, 1]]);
        let gi = g.inverse(&f).unwrap();
        assert_eq!(g.mul(&gi, &f), Mat::identity(2));
        assert!(Mat::from_rows(&[&[1, 1], &[1, 1]]).inverse(&f).is_none());
    }

    #[test]
    fn pattern_conjugation_matches_matrices() {
        let f = FiniteField::new(3, 1).unwrap();
        let perm = [2, 0, 1];
        let x = Mat::permutation(&perm);
        let b = Pattern::upper_borel(3);
        let g = Mat::from_rows(&[&[1, 2, 1], &[0, 2, 1], &[0, 0, 1]]);
        assert!(b.contains(&g));
        let conj = b.conjugate(&x.monomial_permutation().unwrap());
        assert!(conj.contains(&g.conjugate_by(&x, &f)));
        assert!(conj.is_parabolic());
    }
}
