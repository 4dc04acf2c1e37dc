//! Homological model of the pointed curve w^2 = z^n - 1.
//!
//! The n loops l_0..l_{n-1} generate first homology subject to the relation
//! sum l_k = 0 (n = 2g+1) or the two relations sum l_even = sum l_odd = 0
//! (n = 2g+2). Classes are stored in the reduced basis L_0..L_{2g-1}. The
//! order-n automorphism acts by the cyclic index shift; intersection numbers
//! are read cyclically, which is forced by vanishing on the relation rows.

use crate::cyclotomic::{CycError, CycNum};
use num_rational::BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn n_for_genus(self, g: usize) -> usize {
        match self {
            Parity::Odd => 2 * g + 1,
            Parity::Even => 2 * g + 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HomologyError {
    #[error("genus must be at least 2, got {0}")]
    InvalidGenus(usize),
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("classes belong to different curves")]
    CurveMismatch,
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("Poincare dual has a pole at i = n/2 for even n")]
    PoleAtHalfOrder,
    #[error("the closed-chain symplectic basis requires even parity")]
    SchemeParityMismatch,
    #[error(transparent)]
    Cyclotomic(#[from] CycError),
}

/// The homological model of one curve; immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveModel {
    g: usize,
    parity: Parity,
    n: usize,
    relation_matrix: Vec<Vec<i64>>,
}

pub fn build_curve(g: usize, parity: Parity) -> Result<CurveModel, HomologyError> {
    if g < 2 {
        return Err(HomologyError::InvalidGenus(g));
    }
    let n = parity.n_for_genus(g);
    let relation_matrix = match parity {
        Parity::Odd => vec![vec![1i64; n]],
        Parity::Even => {
            let mut even = vec![0i64; n];
            let mut odd = vec![0i64; n];
            for k in 0..n {
                if k % 2 == 0 {
                    even[k] = 1;
                } else {
                    odd[k] = 1;
                }
            }
            vec![even, odd]
        }
    };
    Ok(CurveModel { g, parity, n, relation_matrix })
}

impl CurveModel {
    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Order n of the automorphism, also the number of loop generators.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Rank 2g of the reduced homology.
    pub fn rank(&self) -> usize {
        2 * self.g
    }

    pub fn relation_matrix(&self) -> &[Vec<i64>] {
        &self.relation_matrix
    }

    /// Reduced coordinates of the raw generator l_k (index mod n).
    pub fn loop_class(&self, k: isize) -> HClass {
        let n = self.n as isize;
        let k = k.rem_euclid(n) as usize;
        let d = self.rank();
        let mut coords = vec![0i64; d];
        if k < d {
            coords[k] = 1;
        } else if k == d {
            match self.parity {
                Parity::Odd => coords.iter_mut().for_each(|c| *c = -1),
                Parity::Even => (0..d).step_by(2).for_each(|m| coords[m] = -1),
            }
        } else {
            // k = 2g+1, even parity only
            (1..d).step_by(2).for_each(|m| coords[m] = -1);
        }
        HClass { curve: self.key(), coords }
    }

    fn key(&self) -> CurveKey {
        CurveKey { g: self.g, parity: self.parity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurveKey {
    pub g: usize,
    pub parity: Parity,
}

/// An integral homology class in the reduced basis L_0..L_{2g-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HClass {
    curve: CurveKey,
    coords: Vec<i64>,
}

impl HClass {
    pub fn new(curve: &CurveModel, coords: Vec<i64>) -> Result<Self, HomologyError> {
        if coords.len() != curve.rank() {
            return Err(HomologyError::DimensionMismatch {
                expected: curve.rank(),
                got: coords.len(),
            });
        }
        Ok(HClass { curve: curve.key(), coords })
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// Express a raw chain over l_0..l_{n-1} in the reduced basis. The kernel of
/// this map is exactly the row span of the relation matrix.
pub fn reduce(curve: &CurveModel, raw: &[i64]) -> Result<HClass, HomologyError> {
    if raw.len() != curve.n() {
        return Err(HomologyError::DimensionMismatch { expected: curve.n(), got: raw.len() });
    }
    let d = curve.rank();
    let mut coords = vec![0i64; d];
    for (k, &c) in raw.iter().enumerate() {
        if c != 0 {
            let lc = curve.loop_class(k as isize);
            for (t, lc_t) in lc.coords.iter().enumerate() {
                coords[t] += c * lc_t;
            }
        }
    }
    Ok(HClass { curve: curve.key(), coords })
}

/// Intersection number of two raw generators, read cyclically mod n.
pub fn raw_intersection(curve: &CurveModel, i: usize, j: usize) -> i64 {
    let n = curve.n();
    if (j + n - i) % n == 1 {
        1
    } else if (i + n - j) % n == 1 {
        -1
    } else {
        0
    }
}

/// Intersection pairing, the bilinear extension of the raw table to the
/// reduced basis (reduced basis elements are themselves raw generators).
pub fn intersection(x: &HClass, y: &HClass) -> Result<i64, HomologyError> {
    if x.curve != y.curve {
        return Err(HomologyError::CurveMismatch);
    }
    let curve = build_curve(x.curve.g, x.curve.parity)?;
    let mut s = 0i64;
    for (a, &xc) in x.coords.iter().enumerate() {
        if xc == 0 {
            continue;
        }
        for (b, &yc) in y.coords.iter().enumerate() {
            if yc != 0 {
                s += xc * yc * raw_intersection(&curve, a, b);
            }
        }
    }
    Ok(s)
}

/// Action of phi^power, the linear extension of l_k -> l_{k+power}.
pub fn phi_action(curve: &CurveModel, x: &HClass, power: isize) -> Result<HClass, HomologyError> {
    if x.curve != curve.key() {
        return Err(HomologyError::CurveMismatch);
    }
    let d = curve.rank();
    let mut coords = vec![0i64; d];
    for (k, &c) in x.coords.iter().enumerate() {
        if c != 0 {
            let img = curve.loop_class(k as isize + power);
            for (t, ic) in img.coords.iter().enumerate() {
                coords[t] += c * ic;
            }
        }
    }
    Ok(HClass { curve: curve.key(), coords })
}

/// Matrix of phi^power on the reduced basis; column k is the image of L_k.
pub fn phi_matrix(curve: &CurveModel, power: isize) -> Vec<Vec<i64>> {
    (0..curve.rank())
        .map(|k| curve.loop_class(k as isize + power).coords)
        .collect()
}

/// The eigenvector chi_j = sum_k zeta^{jk} l_k over the raw generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChiVector {
    pub j: usize,
    pub coords: Vec<CycNum>,
}

pub fn chi(curve: &CurveModel, j: usize) -> Result<ChiVector, HomologyError> {
    let n = curve.n();
    if j == 0 || j >= n {
        return Err(HomologyError::IndexOutOfRange(j));
    }
    let coords = (0..n)
        .map(|k| CycNum::zeta_pow(n as u32, (j * k) as i64))
        .collect();
    Ok(ChiVector { j, coords })
}

/// Coefficients of l_i over chi_1..chi_{n-1}: the j-th entry is zeta^{-ij}/n.
pub fn ell_in_chi(curve: &CurveModel, i: usize) -> Result<Vec<CycNum>, HomologyError> {
    let n = curve.n();
    if i >= n {
        return Err(HomologyError::IndexOutOfRange(i));
    }
    let inv_n = BigRational::new(1.into(), (n as i64).into());
    Ok((1..n)
        .map(|j| CycNum::zeta_pow(n as u32, -((i * j) as i64)).scale(&inv_n))
        .collect())
}

/// Cyclotomic extension of the intersection pairing: (chi, l_m).
pub fn chi_pair_loop(curve: &CurveModel, v: &ChiVector, m: usize) -> Result<CycNum, HomologyError> {
    let n = curve.n();
    if m >= n {
        return Err(HomologyError::IndexOutOfRange(m));
    }
    let mut s = CycNum::zero(n as u32);
    for (k, c) in v.coords.iter().enumerate() {
        let w = raw_intersection(curve, k, m);
        if w == 1 {
            s = s.add(c)?;
        } else if w == -1 {
            s = s.sub(c)?;
        }
    }
    Ok(s)
}

/// Poincare dual data of the normalized form of degree i: the scalar
/// lambda_i = 1/(1 + zeta^{-i}) together with chi_i.
pub fn poincare_dual(curve: &CurveModel, i: usize) -> Result<(CycNum, ChiVector), HomologyError> {
    let n = curve.n();
    if i == 0 || i >= n {
        return Err(HomologyError::IndexOutOfRange(i));
    }
    if n % 2 == 0 && i == n / 2 {
        return Err(HomologyError::PoleAtHalfOrder);
    }
    let lam = CycNum::one(n as u32)
        .add(&CycNum::zeta_pow(n as u32, -(i as i64)))?
        .inv()?;
    Ok((lam, chi(curve, i)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymplecticScheme {
    /// a_i = l_{2i-1}, b_i = (l_0 l_2 ... l_{2i-2})^{-1}; even parity only.
    ClosedChain,
    /// a_i = l_{2(g-i)+1}^{-1}, b_i = (l_1 l_3 ... l_{2(g-i)-1})^{-1} l_0 l_1 ... l_{2(g-i)};
    /// the generator system underlying the Magnus computation, both parities.
    Generator,
}

/// A word in the loops l_k: pairs (loop index, +/-1 exponent).
pub type LoopWord = Vec<(usize, i8)>;

#[derive(Debug, Clone)]
pub struct SymplecticBasis {
    pub a: Vec<HClass>,
    pub b: Vec<HClass>,
    pub a_words: Vec<LoopWord>,
    pub b_words: Vec<LoopWord>,
}

fn word_class(curve: &CurveModel, w: &LoopWord) -> HClass {
    let mut raw = vec![0i64; curve.n()];
    for &(k, s) in w {
        raw[k] += s as i64;
    }
    reduce(curve, &raw).expect("loop word has raw length n")
}

/// Loop words of the generator-scheme system a_1..a_g, b_1..b_g.
pub fn generator_scheme_words(curve: &CurveModel) -> (Vec<LoopWord>, Vec<LoopWord>) {
    let g = curve.genus();
    let n = curve.n();
    let mut a_words = Vec::with_capacity(g);
    let mut b_words = Vec::with_capacity(g);
    for i in 1..=g {
        let m = g - i;
        a_words.push(vec![((2 * m + 1) % n, -1)]);
        let mut w: LoopWord = (0..m).rev().map(|t| (2 * t + 1, -1)).collect();
        w.extend((0..=2 * m).map(|k| (k, 1)));
        b_words.push(w);
    }
    (a_words, b_words)
}

pub fn symplectic_basis(
    curve: &CurveModel,
    scheme: SymplecticScheme,
) -> Result<SymplecticBasis, HomologyError> {
    let g = curve.genus();
    let (a_words, b_words): (Vec<LoopWord>, Vec<LoopWord>) = match scheme {
        SymplecticScheme::ClosedChain => {
            if curve.parity() != Parity::Even {
                return Err(HomologyError::SchemeParityMismatch);
            }
            let a = (1..=g).map(|i| vec![(2 * i - 1, 1)]).collect();
            let b = (1..=g)
                .map(|i| (0..i).rev().map(|t| (2 * t, -1)).collect())
                .collect();
            (a, b)
        }
        SymplecticScheme::Generator => generator_scheme_words(curve),
    };
    let a = a_words.iter().map(|w| word_class(curve, w)).collect();
    let b = b_words.iter().map(|w| word_class(curve, w)).collect();
    Ok(SymplecticBasis { a, b, a_words, b_words })
}

impl SymplecticBasis {
    /// 2g x 2g Gram matrix of the intersection pairing in the order
    /// a_1, b_1, ..., a_g, b_g.
    pub fn gram(&self) -> Result<Vec<Vec<i64>>, HomologyError> {
        let g = self.a.len();
        let ordered: Vec<&HClass> = (0..g)
            .flat_map(|i| [&self.a[i], &self.b[i]])
            .collect();
        let mut m = vec![vec![0i64; 2 * g]; 2 * g];
        for (r, x) in ordered.iter().enumerate() {
            for (c, y) in ordered.iter().enumerate() {
                m[r][c] = intersection(x, y)?;
            }
        }
        Ok(m)
    }
}

/// The standard symplectic Gram matrix in the order a_1, b_1, ..., a_g, b_g.
pub fn standard_symplectic_gram(g: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; 2 * g]; 2 * g];
    for i in 0..g {
        m[2 * i][2 * i + 1] = 1;
        m[2 * i + 1][2 * i] = -1;
    }
    m
}
