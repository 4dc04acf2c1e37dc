//! Exact arithmetic in the cyclotomic field Q(zeta_n) = Q[z]/(Phi_n(z)).
//!
//! Elements are stored in canonical form: a coefficient vector of exact
//! rationals in the power basis 1, zeta, ..., zeta^(deg Phi_n - 1), always
//! reduced modulo the n-th cyclotomic polynomial. Equality and the
//! rationality test are therefore plain coefficient comparisons. No floating
//! point is used anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CycError {
    #[error("division by zero in Q(zeta_{0})")]
    DivisionByZero(u32),
    #[error("incompatible root-of-unity orders {0} and {1}")]
    IncompatibleOrder(u32, u32),
    #[error("element of Q(zeta_{0}) is not rational")]
    NotRational(u32),
}

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

fn divisors(n: u32) -> Vec<u32> {
    let mut d: Vec<u32> = (1..=n).filter(|k| n % k == 0).collect();
    d.sort_unstable();
    d
}

/// The n-th cyclotomic polynomial Phi_n as ascending integer coefficients,
/// computed by dividing z^n - 1 by Phi_d for every proper divisor d of n.
pub fn cyclotomic_poly(n: u32) -> Vec<BigInt> {
    assert!(n >= 1, "cyclotomic_poly: n must be positive");
    if n == 1 {
        return vec![BigInt::from(-1), BigInt::from(1)];
    }
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in divisors(n) {
        if d == n {
            continue;
        }
        num = int_poly_div_exact(&num, &cyclotomic_poly(d));
    }
    num
}

/// Exact division of integer polynomials; divisor must be monic and divide evenly.
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    assert!(den.last().map(|c| c.is_one()).unwrap_or(false));
    let mut rem: Vec<BigInt> = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len() - 1 - dn;
    let mut quot = vec![BigInt::zero(); qn + 1];
    for i in (0..=qn).rev() {
        let c = rem[i + dn].clone();
        if !c.is_zero() {
            for (j, dc) in den.iter().enumerate() {
                rem[i + j] -= &c * dc;
            }
        }
        quot[i] = c;
    }
    assert!(rem.iter().all(|c| c.is_zero()), "non-exact polynomial division");
    quot
}

/// Euler phi, the degree of Phi_n.
pub fn phi_degree(n: u32) -> usize {
    cyclotomic_poly(n).len() - 1
}

/// An element of Q(zeta_n) in the canonical power basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycNum {
    n: u32,
    coeffs: Vec<Rat>,
}

impl CycNum {
    pub fn zero(n: u32) -> Self {
        CycNum { n, coeffs: vec![Rat::zero(); phi_degree(n)] }
    }

    pub fn one(n: u32) -> Self {
        Self::from_rational(n, Rat::one())
    }

    pub fn from_rational(n: u32, value: Rat) -> Self {
        let mut x = Self::zero(n);
        x.coeffs[0] = value;
        x
    }

    pub fn from_int(n: u32, value: i64) -> Self {
        Self::from_rational(n, rat(value, 1))
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Canonical form of zeta_n^e, exponent reduced mod n, then mod Phi_n.
    pub fn zeta_pow(n: u32, e: i64) -> Self {
        assert!(n >= 2, "zeta_pow: n must be at least 2");
        let e = e.rem_euclid(n as i64) as usize;
        let mut poly = vec![Rat::zero(); e + 1];
        poly[e] = Rat::one();
        Self::from_poly(n, poly)
    }

    /// Reduce an arbitrary polynomial in zeta to canonical form.
    fn from_poly(n: u32, mut poly: Vec<Rat>) -> Self {
        let phi: Vec<Rat> = cyclotomic_poly(n)
            .into_iter()
            .map(|c| Rat::from_integer(c))
            .collect();
        let deg = phi.len() - 1;
        while poly.len() > deg {
            let top = poly.len() - 1;
            let c = poly[top].clone();
            if !c.is_zero() {
                for j in 0..=deg {
                    let idx = top - deg + j;
                    let t = &c * &phi[j];
                    poly[idx] -= t;
                }
            }
            poly.pop();
        }
        poly.resize(deg, Rat::zero());
        CycNum { n, coeffs: poly }
    }

    fn check_order(&self, other: &Self) -> Result<(), CycError> {
        if self.n != other.n {
            return Err(CycError::IncompatibleOrder(self.n, other.n));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, CycError> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycNum { n: self.n, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CycError> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CycNum { n: self.n, coeffs })
    }

    pub fn neg(&self) -> Self {
        CycNum { n: self.n, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, CycError> {
        self.check_order(other)?;
        let mut prod = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(Self::from_poly(self.n, prod))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        CycNum { n: self.n, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against Phi_n.
    pub fn inv(&self) -> Result<Self, CycError> {
        if self.is_zero() {
            return Err(CycError::DivisionByZero(self.n));
        }
        let phi: Vec<Rat> = cyclotomic_poly(self.n)
            .into_iter()
            .map(Rat::from_integer)
            .collect();
        // extended gcd of (self, Phi_n) over Q[z]; Phi_n is squarefree and
        // self != 0 has degree < deg Phi_n, so the gcd is a nonzero constant
        let (g, s) = ext_gcd_poly(&self.coeffs, &phi);
        debug_assert_eq!(poly_deg(&g), 0);
        let c = g[0].recip();
        Ok(Self::from_poly(self.n, s.into_iter().map(|x| x * &c).collect()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// True iff every coefficient beyond index 0 vanishes.
    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn to_rational(&self) -> Result<Rat, CycError> {
        if !self.is_rational() {
            return Err(CycError::NotRational(self.n));
        }
        Ok(self.coeffs[0].clone())
    }

    /// Galois conjugation zeta -> zeta^{-1} (complex conjugation).
    pub fn conj(&self) -> Self {
        let mut poly = vec![Rat::zero(); self.n as usize];
        for (e, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let idx = (self.n as usize - e) % self.n as usize;
                poly[idx] += c;
            }
        }
        Self::from_poly(self.n, poly)
    }

    pub fn pow(&self, e: u32) -> Result<Self, CycError> {
        let mut acc = Self::one(self.n);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

fn poly_deg(p: &[Rat]) -> usize {
    p.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
}

/// Extended gcd over Q[z]: returns (g, s) with s*a + t*b = g for some t.
fn ext_gcd_poly(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r0: Vec<Rat> = a.to_vec();
    let mut r1: Vec<Rat> = b.to_vec();
    let mut s0 = vec![Rat::one()];
    let mut s1 = vec![Rat::zero()];
    while !r1.iter().all(|c| c.is_zero()) {
        let (q, r) = poly_divrem(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    (r0, s0)
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}

fn poly_divrem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let db = poly_deg(b);
    let lead = b[db].clone();
    let mut rem: Vec<Rat> = a.to_vec();
    let da = poly_deg(&rem);
    if da < db && rem[da].is_zero() {
        return (vec![Rat::zero()], rem);
    }
    let mut quot = vec![Rat::zero(); da.saturating_sub(db) + 1];
    for i in (db..=da).rev() {
        let c = &rem[i] / &lead;
        if c.is_zero() {
            continue;
        }
        quot[i - db] = c.clone();
        for j in 0..=db {
            let t = &c * &b[j];
            rem[i - db + j] -= t;
        }
    }
    (quot, rem)
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            match e {
                0 => write!(f, "{a}")?,
                1 if a.is_one() => write!(f, "z")?,
                1 => write!(f, "{a}*z")?,
                _ if a.is_one() => write!(f, "z^{e}")?,
                _ => write!(f, "{a}*z^{e}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_cyc(n: u32) -> impl Strategy<Value = CycNum> {
        let deg = phi_degree(n);
        proptest::collection::vec((-6i64..=6, 1i64..=4), deg).prop_map(move |cs| {
            let mut x = CycNum::zero(n);
            for (i, (p, q)) in cs.into_iter().enumerate() {
                x.coeffs[i] = rat(p, q);
            }
            x
        })
    }

    proptest! {
        #[test]
        fn mul_commutes(a in arb_cyc(6), b in arb_cyc(6)) {
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        }

        #[test]
        fn mul_inv_is_one(a in arb_cyc(5)) {
            if !a.is_zero() {
                prop_assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), CycNum::one(5));
            }
        }

        #[test]
        fn add_neg_cancels(a in arb_cyc(7)) {
            prop_assert!(a.add(&a.neg()).unwrap().is_zero());
        }

        #[test]
        fn mul_distributes(a in arb_cyc(6), b in arb_cyc(6), c in arb_cyc(6)) {
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn zeta_pow_has_order_n(e in -20i64..20) {
            for n in [5u32, 6] {
                prop_assert_eq!(CycNum::zeta_pow(n, e).pow(n).unwrap(), CycNum::one(n));
            }
        }

        #[test]
        fn galois_sum_is_rational(u in -15i64..15) {
            let n = 6u32;
            let mut s = CycNum::zero(n);
            for e in 0..n as i64 {
                s = s.add(&CycNum::zeta_pow(n, e * u)).unwrap();
            }
            prop_assert!(s.is_rational());
            let expect = if u.rem_euclid(n as i64) == 0 { n as i64 } else { 0 };
            prop_assert_eq!(s.to_rational().unwrap(), rat(expect, 1));
        }

        #[test]
        fn canonical_form_separates_powers(e1 in 0i64..12, e2 in 0i64..12) {
            let n = 7u32;
            let eq = CycNum::zeta_pow(n, e1) == CycNum::zeta_pow(n, e2);
            prop_assert_eq!(eq, e1.rem_euclid(7) == e2.rem_euclid(7));
        }
    }
}
