//! Dense univariate complex polynomials and companion-matrix root finding.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::primitives::{complex_to_pair, pair_to_complex};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients below this fraction of the largest one are treated as zero
/// when trimming leading or trailing terms.
pub const COEFF_REL_TOL: f64 = 1e-14;

/// Polynomial `sum_k coeffs[k] ζ^k` (ascending order).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `ζ - a`.
    pub fn linear_root(a: Complex64) -> Self {
        Self {
            coeffs: vec![-a, ONE],
        }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Self::constant(ONE);
        for &r in roots {
            p = p.mul(&Self::linear_root(r));
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Formal length minus one; not trimmed.
    pub fn formal_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient moduli; bounds |p| on the closed unit disc.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Degree after dropping leading coefficients that are numerically zero.
    pub fn degree(&self) -> Option<usize> {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return None;
        }
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > COEFF_REL_TOL * scale)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self {
            coeffs: (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Multiply by ζ^k.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// `p(λζ)`.
    pub fn compose_scale(&self, lambda: Complex64) -> Self {
        let mut pw = ONE;
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    let out = c * pw;
                    pw *= lambda;
                    out
                })
                .collect(),
        }
    }

    /// `p(ζ^k)`.
    pub fn compose_power(&self, k: usize) -> Self {
        assert!(k >= 1);
        let mut coeffs = vec![ZERO; self.formal_degree() * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k] = *c;
        }
        Self { coeffs }
    }

    /// Synthetic division by `(ζ - a)`; returns quotient and remainder p(a).
    pub fn deflate(&self, a: Complex64) -> (Self, Complex64) {
        if self.coeffs.is_empty() {
            return (Self::zero(), ZERO);
        }
        let n = self.coeffs.len();
        let mut q = vec![ZERO; n.saturating_sub(1)];
        let mut acc = ZERO;
        for k in (0..n).rev() {
            acc = acc * a + self.coeffs[k];
            if k > 0 {
                q[k - 1] = acc;
            }
        }
        (Self { coeffs: q }, acc)
    }

    /// Taylor coefficients `p^{(k)}(c)/k!`, i.e. the coefficients of `p(c + h)` in h.
    pub fn taylor_at(&self, c: Complex64) -> Vec<Complex64> {
        let mut work = self.coeffs.clone();
        let n = work.len();
        // repeated synthetic division (Horner shift)
        for i in 0..n {
            for k in (i..n - 1).rev() {
                let t = work[k + 1] * c;
                work[k] += t;
            }
        }
        work
    }

    /// Trim numerically-zero leading coefficients.
    pub fn trimmed(&self) -> Self {
        match self.degree() {
            None => Self::zero(),
            Some(d) => Self {
                coeffs: self.coeffs[..=d].to_vec(),
            },
        }
    }

    /// Truncate to degree ≤ d; returns the dropped coefficients' l1 norm.
    pub fn truncate(&mut self, d: usize) -> f64 {
        if self.coeffs.len() <= d + 1 {
            return 0.0;
        }
        let dropped = self.coeffs[d + 1..].iter().map(|c| c.norm()).sum();
        self.coeffs.truncate(d + 1);
        dropped
    }

    /// Number of leading Taylor coefficients at `c` that vanish numerically,
    /// i.e. the numerical order of the zero of p at c. `usize::MAX` for p ≡ 0.
    pub fn order_at(&self, c: Complex64, rel_tol: f64) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let t = self.taylor_at(c);
        // rounding in t_k is bounded by the k-th Taylor coefficient of
        // Σ |c_j| x^j at x = |c|
        let abs = Self {
            coeffs: self.coeffs.iter().map(|x| Complex64::new(x.norm(), 0.0)).collect(),
        };
        let bound = abs.taylor_at(Complex64::new(c.norm(), 0.0));
        let floor = rel_tol * self.max_abs_coeff();
        t.iter()
            .zip(&bound)
            .take_while(|(x, b)| x.norm() <= (rel_tol * b.re).max(floor * f64::EPSILON))
            .count()
    }

    /// All roots of p (after trimming), counted with multiplicity.
    /// Roots at the origin are read off exactly from trailing zero coefficients.
    pub fn roots(&self) -> Vec<Complex64> {
        let p = self.trimmed();
        let Some(deg) = p.degree() else {
            return Vec::new();
        };
        let scale = p.max_abs_coeff();
        let low = p
            .coeffs
            .iter()
            .position(|c| c.norm() > COEFF_REL_TOL * scale)
            .unwrap_or(0);
        let mut roots = vec![ZERO; low];
        let core = Polynomial::new(p.coeffs[low..=deg].to_vec());
        roots.extend(companion_roots(&core));
        roots
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(complex_to_pair).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        if pairs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(serde::de::Error::custom("non-finite coefficient"));
        }
        Ok(Polynomial::new(pairs.into_iter().map(pair_to_complex).collect()))
    }
}

/// Roots of a polynomial with nonzero constant and leading coefficient,
/// from the eigenvalues of its balanced companion matrix, followed by a
/// Newton polish of isolated roots.
fn companion_roots(p: &Polynomial) -> Vec<Complex64> {
    let c = p.coeffs();
    let deg = c.len() - 1;
    match deg {
        0 => return Vec::new(),
        1 => return vec![-c[0] / c[1]],
        _ => {}
    }
    let lead = c[deg];
    let mut m = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -c[i] / lead;
    }
    balance(&mut m);
    let eig: Vec<Complex64> = match Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
        Some(s) => {
            let (_, t) = s.unpack();
            (0..deg).map(|i| t[(i, i)]).collect()
        }
        None => match m.eigenvalues() {
            Some(v) => v.iter().copied().collect(),
            None => Vec::new(),
        },
    };
    polish(p, eig)
}

/// Parlett-Reinsch balancing by powers of two; eigenvalues are unchanged.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut row = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].l1_norm();
                    row += m[(i, j)].l1_norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut g = row / radix;
            let mut c = col;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = row * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + row / f) < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn polish(p: &Polynomial, mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let dp = p.derivative();
    let n = roots.len();
    for i in 0..n {
        let r = roots[i];
        let scale = r.norm().max(1.0);
        // numerically multiple roots come out of the eigensolver spread by
        // about eps^(1/m); Newton is slow and unstable there, and the cluster
        // centroid is already accurate
        let isolated = (0..n).all(|j| j == i || (roots[j] - r).norm() > 1e-2 * scale);
        if !isolated {
            continue;
        }
        let mut x = r;
        let mut best = p.eval(x).norm();
        for _ in 0..6 {
            // Newton with the other roots divided out implicitly
            let others: Complex64 = (0..n).filter(|&j| j != i).map(|j| ONE / (x - roots[j])).sum();
            let px = p.eval(x);
            let d = dp.eval(x) - px * others;
            if d == ZERO {
                break;
            }
            let cand = x - px / d;
            let res = p.eval(cand).norm();
            if !(res < best) {
                break;
            }
            x = cand;
            best = res;
        }
        roots[i] = x;
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn horner_and_derivative() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(-3.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(p.eval(c(2.0, 0.0)), c(3.0, 0.0));
        assert_eq!(p.derivative().eval(c(2.0, 0.0)), c(5.0, 0.0));
    }

    #[test]
    fn roots_of_known_product() {
        let want = vec![c(0.5, 0.0), c(-0.25, 0.75), c(3.0, -1.0), c(0.0, 2.0)];
        let p = Polynomial::from_roots(&want).scale(c(2.0, 1.0));
        let got = sorted(p.roots());
        for (g, w) in got.iter().zip(sorted(want)) {
            assert!((g - w).norm() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn trailing_zeros_give_exact_origin_roots() {
        let p = Polynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0), c(1.0, 0.0)]);
        let r = p.roots();
        assert_eq!(r.iter().filter(|z| **z == c(0.0, 0.0)).count(), 2);
        assert!(r.iter().any(|z| (z - c(0.5, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn taylor_shift_and_order() {
        // (ζ - 0.3)^3 (ζ + 2)
        let p = Polynomial::from_roots(&[c(0.3, 0.0), c(0.3, 0.0), c(0.3, 0.0), c(-2.0, 0.0)]);
        assert_eq!(p.order_at(c(0.3, 0.0), 1e-11), 3);
        assert_eq!(p.order_at(c(0.31, 0.0), 1e-11), 0);
        let t = p.taylor_at(c(1.0, 0.0));
        // p(1 + h) at h = 0.5 equals p(1.5)
        let h = c(0.5, 0.0);
        let via: Complex64 = t.iter().rev().fold(c(0.0, 0.0), |a, x| a * h + x);
        assert!((via - p.eval(c(1.5, 0.0))).norm() < 1e-12);
    }

    #[test]
    fn deflation_is_exact_on_roots() {
        let p = Polynomial::from_roots(&[c(0.3, 0.1), c(2.0, 0.0)]);
        let (q, rem) = p.deflate(c(0.3, 0.1));
        assert!(rem.norm() < 1e-15);
        assert!((q.eval(c(0.0, 0.0)) - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn compose_power_and_scale() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0)]);
        let q = p.compose_power(3);
        assert_eq!(q.coeffs().len(), 4);
        let z = c(0.3, 0.4);
        assert!((q.eval(z) - p.eval(z.powu(3))).norm() < 1e-15);
        let s = p.compose_scale(c(0.0, 1.0));
        assert!((s.eval(z) - p.eval(z * c(0.0, 1.0))).norm() < 1e-15);
    }
}
