//! Points of C^n and P^n, and equispaced quadrature grids on the unit circle.

use std::f64::consts::TAU;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Serialize a complex number as `[re, im]`.
pub(crate) fn complex_to_pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub(crate) fn pair_to_complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// A point of C^n with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n.max(1)])
    }

    /// Build from interleaved real coordinates `re1, im1, ..., ren, imn`.
    pub fn from_reals(reals: &[f64]) -> Result<Self> {
        if reals.is_empty() || !reals.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: 2 * (reals.len() / 2).max(1),
                got: reals.len(),
            });
        }
        Self::new(
            reals
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    /// A point of C^1.
    pub fn scalar(z: Complex64) -> Self {
        Self(vec![z])
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    /// Real inner product on R^{2n}: Re sum conj(a_i) b_i.
    pub fn real_dot(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: Self) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ComplexVector {
    type Output = ComplexVector;
    fn sub(self, rhs: Self) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &ComplexVector {
    type Output = ComplexVector;
    fn mul(self, rhs: f64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|a| a * rhs).collect())
    }
}

impl Serialize for ComplexVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(complex_to_pair).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        ComplexVector::new(pairs.into_iter().map(pair_to_complex).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// A point `[z_0 : ... : z_n]` of P^n in canonical form: the first
/// coordinate of largest modulus is exactly 1. The representative it was
/// built from is kept so that affine coordinates are recovered without
/// extra rounding.
#[derive(Debug, Clone)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
    raw: Vec<Complex64>,
}

impl PartialEq for ProjectivePoint {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}

/// Normalize homogeneous coordinates by the largest-modulus entry.
pub fn proj_normalize(raw: &[Complex64]) -> Result<ProjectivePoint> {
    if raw.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    // max by |re|+|im| first to avoid overflow in norm(), then exact modulus for ties
    let mut best = 0usize;
    let mut best_mod = 0.0f64;
    for (i, c) in raw.iter().enumerate() {
        let m = c.re.hypot(c.im);
        if m > best_mod {
            best = i;
            best_mod = m;
        }
    }
    if best_mod == 0.0 {
        return Err(Error::InvalidPoint);
    }
    let pivot = raw[best];
    let coords = raw
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if i == best {
                Complex64::new(1.0, 0.0)
            } else {
                c / pivot
            }
        })
        .collect();
    Ok(ProjectivePoint {
        coords,
        raw: raw.to_vec(),
    })
}

impl ProjectivePoint {
    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Dimension n of the ambient P^n.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn is_at_infinity(&self) -> bool {
        self.coords[0] == Complex64::new(0.0, 0.0)
    }

    /// |z_0| in canonical coordinates.
    pub fn infinity_proximity(&self) -> f64 {
        self.coords[0].norm()
    }
}

/// `[1 : z_1 : ... : z_n]`.
pub fn affine_embed(z: &ComplexVector) -> ProjectivePoint {
    let mut raw = Vec::with_capacity(z.dim() + 1);
    raw.push(Complex64::new(1.0, 0.0));
    raw.extend_from_slice(z.coords());
    proj_normalize(&raw).expect("affine point has a unit coordinate")
}

/// Affine coordinates `(z_1/z_0, ..., z_n/z_0)`, computed from the original
/// representative.
pub fn affine_part(p: &ProjectivePoint) -> Result<ComplexVector> {
    if p.is_at_infinity() {
        return Err(Error::PointAtInfinity);
    }
    let z0 = p.raw[0];
    let coords = if z0 == Complex64::new(1.0, 0.0) {
        p.raw[1..].to_vec()
    } else {
        p.raw[1..].iter().map(|c| c / z0).collect()
    };
    ComplexVector::new(coords)
}

/// N equispaced nodes on the unit circle, each with weight 1/N.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleGrid {
    nodes: Vec<Complex64>,
}

pub const MIN_GRID_NODES: usize = 8;

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_GRID_NODES {
            return Err(Error::InvalidConfig(format!(
                "circle grid needs at least {MIN_GRID_NODES} nodes, got {n}"
            )));
        }
        let nodes = (0..n)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
            .collect();
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.nodes.len() as f64
    }

    /// Angle of node k.
    pub fn angle(&self, k: usize) -> f64 {
        TAU * k as f64 / self.nodes.len() as f64
    }

    /// Trapezoid rule: (1/N) sum f(node).
    pub fn mean<F: FnMut(Complex64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().map(|&z| f(z)).sum::<f64>() * self.weight()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalize_divides_by_largest() {
        let p = proj_normalize(&[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(p.coords(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        // tie between |3i| and |3|: lowest index wins
        let p = proj_normalize(&[c(0.0, 0.0), c(0.0, 3.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(p.coords()[1], c(1.0, 0.0));
        assert!((p.coords()[2] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(p.is_at_infinity());
    }

    #[test]
    fn normalize_tiny_coordinate() {
        let p = proj_normalize(&[c(1e-300, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(p.coords().iter().all(|z| z.re.is_finite()));
        assert!(!p.is_at_infinity());
    }

    #[test]
    fn normalize_rejects_zero() {
        assert_eq!(
            proj_normalize(&[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(Error::InvalidPoint)
        );
    }

    #[test]
    fn affine_round_trip() {
        let z = ComplexVector::new(vec![c(5.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p = affine_embed(&z);
        assert_eq!(affine_part(&p).unwrap(), z);

        let origin = ComplexVector::zeros(3);
        assert_eq!(
            affine_embed(&origin).coords(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
    }

    #[test]
    fn affine_part_at_infinity() {
        let p = proj_normalize(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(affine_part(&p), Err(Error::PointAtInfinity));
    }

    #[test]
    fn grid_weights() {
        assert!(CircleGrid::new(4).is_err());
        for n in [8, 64, 1000, 2048] {
            let g = CircleGrid::new(n).unwrap();
            let total: f64 = (0..g.len()).map(|_| g.weight()).sum();
            assert!((total - 1.0).abs() < 1e-15);
            for z in g.nodes() {
                assert!((z.powu(n as u32) - c(1.0, 0.0)).norm() < 1e-10);
            }
        }
    }
}
