//! Finite fields `F_{p^m}` by lookup tables.
//!
//! An element is stored as the integer whose base-`p` digits are its
//! coefficients in `F_p[t]/(f)`, lowest degree first. The constants
//! `0..p` are therefore exactly the prime field.

use super::FiniteZipError;

/// Largest field order handled by the table representation.
pub const MAX_FIELD_ORDER: usize = 1024;

#[derive(Clone)]
pub struct FiniteField {
    p: u16,
    m: u32,
    order: usize,
    modulus: Vec<u16>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    frob: Vec<u16>,
    primitive: u16,
}

impl std::fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_{}^{} (modulus {:?})", self.p, self.m, self.modulus)
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

// Polynomials over F_p as coefficient vectors, lowest degree first.
fn poly_mulmod(a: &[u16], b: &[u16], modulus: &[u16], p: u16) -> Vec<u16> {
    let m = modulus.len() - 1;
    let p = p as u32;
    let mut prod = vec![0u32; 2 * m];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u32 * y as u32) % p;
        }
    }
    // modulus is monic
    for deg in (m..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        for k in 0..=m {
            let sub = c * modulus[k] as u32 % p;
            let idx = deg - m + k;
            prod[idx] = (prod[idx] + p - sub) % p;
        }
    }
    prod[..m].iter().map(|&c| c as u16).collect()
}

fn digits(mut x: usize, p: u16, m: usize) -> Vec<u16> {
    (0..m)
        .map(|_| {
            let d = (x % p as usize) as u16;
            x /= p as usize;
            d
        })
        .collect()
}

fn undigits(ds: &[u16], p: u16) -> usize {
    ds.iter().rev().fold(0, |acc, &d| acc * p as usize + d as usize)
}

// Trial division by every monic polynomial of degree 1..=m/2.
fn is_irreducible(f: &[u16], p: u16) -> bool {
    let m = f.len() - 1;
    for deg in 1..=m / 2 {
        let count = (p as usize).pow(deg as u32);
        for low in 0..count {
            let mut g = digits(low, p, deg);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_rem(a: &[u16], g: &[u16], p: u16) -> Vec<u16> {
    let p32 = p as u32;
    let mut r: Vec<u32> = a.iter().map(|&c| c as u32).collect();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = r[r.len() - 1];
        let shift = r.len() - 1 - dg;
        if lead != 0 {
            for (k, &gk) in g.iter().enumerate() {
                let sub = lead * gk as u32 % p32;
                r[shift + k] = (r[shift + k] + p32 - sub) % p32;
            }
        }
        r.pop();
    }
    r.into_iter().map(|c| c as u16).collect()
}

impl FiniteField {
    /// Builds `F_{p^m}` using the lexicographically first monic irreducible
    /// polynomial of degree `m`.
    pub fn new(p: u64, m: u32) -> Result<Self, FiniteZipError> {
        if !is_prime(p) {
            return Err(FiniteZipError::InvalidField(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(FiniteZipError::InvalidField("degree must be positive".into()));
        }
        let order = (p as u128).checked_pow(m).filter(|&o| o <= MAX_FIELD_ORDER as u128);
        let Some(order) = order else {
            return Err(FiniteZipError::InvalidField(format!(
                "F_{p}^{m} exceeds the table limit of {MAX_FIELD_ORDER} elements"
            )));
        };
        let order = order as usize;
        let p16 = p as u16;
        let mu = m as usize;
        let modulus = (0..order)
            .map(|low| {
                let mut f = digits(low, p16, mu);
                f.push(1);
                f
            })
            .find(|f| is_irreducible(f, p16))
            .expect("an irreducible polynomial of every degree exists");

        let mut add = vec![0u16; order * order];
        let mut mul = vec![0u16; order * order];
        let ds: Vec<Vec<u16>> = (0..order).map(|x| digits(x, p16, mu)).collect();
        for a in 0..order {
            for b in 0..order {
                let sum: Vec<u16> = ds[a].iter().zip(&ds[b]).map(|(x, y)| (x + y) % p16).collect();
                add[a * order + b] = undigits(&sum, p16) as u16;
                mul[a * order + b] = undigits(&poly_mulmod(&ds[a], &ds[b], &modulus, p16), p16) as u16;
            }
        }
        let mut neg = vec![0u16; order];
        let mut inv = vec![0u16; order];
        for a in 0..order {
            neg[a] = (0..order).find(|&b| add[a * order + b] == 0).unwrap() as u16;
            if a != 0 {
                inv[a] = (1..order).find(|&b| mul[a * order + b] == 1).unwrap() as u16;
            }
        }
        let mut frob = vec![0u16; order];
        for (a, fr) in frob.iter_mut().enumerate() {
            let mut x = 1u16;
            for _ in 0..p {
                x = mul[x as usize * order + a];
            }
            *fr = x;
        }
        let mut field = FiniteField {
            p: p16,
            m,
            order,
            modulus,
            add,
            mul,
            neg,
            inv,
            frob,
            primitive: 1,
        };
        field.primitive = (1..order as u16)
            .find(|&g| field.multiplicative_order(g) == order - 1)
            .expect("the multiplicative group is cyclic");
        Ok(field)
    }

    pub fn characteristic(&self) -> u64 {
        self.p as u64
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn modulus(&self) -> &[u16] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.order + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.order + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u16) -> u16 {
        self.neg[a as usize]
    }

    /// Multiplicative inverse; `inv(0)` is 0.
    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        self.inv[a as usize]
    }

    /// The `p`-power Frobenius.
    #[inline]
    pub fn frobenius(&self, a: u16) -> u16 {
        self.frob[a as usize]
    }

    pub fn pow(&self, a: u16, mut e: u64) -> u16 {
        let mut base = a;
        let mut acc = 1u16;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// A generator of the multiplicative group.
    pub fn primitive_element(&self) -> u16 {
        self.primitive
    }

    /// The monomials `1, t, .., t^{m-1}`, an `F_p`-basis.
    pub fn prime_basis(&self) -> Vec<u16> {
        (0..self.m).map(|k| (self.p as usize).pow(k) as u16).collect()
    }

    pub fn is_prime_field_element(&self, a: u16) -> bool {
        (a as u64) < self.p as u64
    }

    fn multiplicative_order(&self, g: u16) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Checks the field axioms on the tables, and `x^{p^m} = x`.
    pub fn verify_axioms(&self) -> bool {
        let n = self.order as u16;
        let all = 0..n;
        let q = self.order as u64;
        all.clone().all(|a| {
            self.add(a, 0) == a
                && self.mul(a, 1) == a
                && self.add(a, self.neg(a)) == 0
                && (a == 0 || self.mul(a, self.inv(a)) == 1)
                && self.pow(a, q) == a
                && (0..n).all(|b| {
                    self.add(a, b) == self.add(b, a)
                        && self.mul(a, b) == self.mul(b, a)
                        && (0..n).step_by(((n as usize) / 7).max(1)).all(|c| {
                            self.mul(a, self.add(b, c)) == self.add(self.mul(a, b), self.mul(a, c))
                                && self.mul(a, self.mul(b, c)) == self.mul(self.mul(a, b), c)
                                && self.add(a, self.add(b, c)) == self.add(self.add(a, b), c)
                        })
                })
        })
    }
}
