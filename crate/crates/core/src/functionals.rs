//! Disc functionals: J, the Poisson functional, H_B, H_r and the Jensen
//! cross-check.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

pub use crate::discs::J;
use crate::discs::RationalDisc;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::primitives::{CircleGrid, ComplexVector};

/// Value of a disc functional with its two parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub j_part: f64,
    pub poisson_part: f64,
    /// Fraction of the circle mapped outside X.
    pub bad_boundary_measure: f64,
}

impl FunctionalValue {
    pub fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            j_part: f64::INFINITY,
            poisson_part: 0.0,
            bad_boundary_measure: 0.0,
        }
    }
}

fn affine_at(f: &RationalDisc, zeta: Complex64) -> Result<ComplexVector> {
    f.eval_affine(zeta).ok_or(Error::PointAtInfinity)
}

/// Trapezoid rule for `∫_{T∖f⁻¹(X)} u∘f dσ`; also returns the fraction of
/// nodes outside X. Nodes on ∂X count as outside.
pub fn poisson_integral<U>(u: U, f: &RationalDisc, grid: &CircleGrid, x: &Domain) -> Result<(f64, f64)>
where
    U: Fn(&ComplexVector) -> f64,
{
    let mut total = 0.0;
    let mut outside = 0usize;
    for &zeta in grid.nodes() {
        let z = affine_at(f, zeta)?;
        z.check_dim(x.dim())?;
        if !x.contains_unchecked(&z) {
            total += u(&z);
            outside += 1;
        }
    }
    let w = grid.weight();
    Ok((total * w, outside as f64 * w))
}

// 8-point Gauss-Legendre on [-1, 1]
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
        s += w * (f(m - h * x) + f(m + h * x));
    }
    s * h
}

/// Poisson integral with the arcs of `T∖f⁻¹(X)` located by bisection and
/// integrated by composite Gauss-Legendre. Meant for fields that vanish
/// continuously on ∂X, where the plain trapezoid rule converges only at
/// first order. `grid` fixes the resolution at which arcs are detected.
pub fn poisson_integral_refined<U>(
    u: U,
    f: &RationalDisc,
    grid: &CircleGrid,
    x: &Domain,
) -> Result<(f64, f64)>
where
    U: Fn(&ComplexVector) -> f64,
{
    let n = grid.len();
    let step = TAU / n as f64;
    let sd = |theta: f64| -> Result<f64> {
        let z = affine_at(f, Complex64::from_polar(1.0, theta))?;
        Ok(x.signed_distance(&z))
    };
    let inside: Vec<bool> = (0..n)
        .map(|k| sd(k as f64 * step).map(|d| d > 0.0))
        .collect::<Result<_>>()?;
    if inside.iter().all(|&b| b) {
        return Ok((0.0, 0.0));
    }
    let crossing = |a: f64, b: f64, a_inside: bool| -> Result<f64> {
        let (mut lo, mut hi) = (a, b);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if (sd(mid)? > 0.0) == a_inside {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    // outside arcs as [start, end] in angle, possibly wrapping past 2π
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    if inside.iter().all(|&b| !b) {
        arcs.push((0.0, TAU));
    } else {
        let first_in = inside.iter().position(|&b| b).expect("some node inside");
        let mut k = first_in;
        let mut start: Option<f64> = None;
        for _ in 0..n {
            let next = (k + 1) % n;
            let a = k as f64 * step;
            let b = a + step;
            if inside[k] && !inside[next] {
                start = Some(crossing(a, b, true)?);
            } else if !inside[k] && inside[next] {
                let end = crossing(a, b, false)?;
                let s = start.take().expect("arc opened before closing");
                arcs.push((s, if end < s { end + TAU } else { end }));
            }
            k = next;
        }
    }
    let mut total = 0.0;
    let mut measure = 0.0;
    for (a, b) in arcs {
        let len = b - a;
        measure += len;
        let pieces = ((len / step).ceil() as usize).max(1);
        let h = len / pieces as f64;
        for p in 0..pieces {
            let lo = a + p as f64 * h;
            let mut err = None;
            total += gauss_legendre(lo, lo + h, |t| match affine_at(f, Complex64::from_polar(1.0, t)) {
                Ok(z) => u(&z),
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
    }
    Ok((total / TAU, measure / TAU))
}

/// H_B(f) = J(f) + ∫_{T∖f⁻¹(X)} E_B J∘f dσ.
#[allow(non_snake_case)]
pub fn H_B<U>(f: &RationalDisc, x: &Domain, ebj: U, grid: &CircleGrid) -> Result<FunctionalValue>
where
    U: Fn(&ComplexVector) -> f64,
{
    let j = J(f)?;
    if j.is_infinite() {
        return Ok(FunctionalValue::infinite());
    }
    let (p, bad) = poisson_integral(ebj, f, grid, x)?;
    Ok(FunctionalValue {
        value: j + p,
        j_part: j,
        poisson_part: p,
        bad_boundary_measure: bad,
    })
}

/// H_r(f) = ∫_{T∖f⁻¹(X)} log‖f - a‖ dσ - σ(T∖f⁻¹(X)) log r, for discs in C^n
/// and a closed ball B(a, r) inside X.
#[allow(non_snake_case)]
pub fn H_r(f: &RationalDisc, x: &Domain, a: &ComplexVector, r: f64, grid: &CircleGrid) -> Result<f64> {
    a.check_dim(x.dim())?;
    if !(r > 0.0) {
        return Err(Error::InvalidConfig(format!("radius must be positive, got {r}")));
    }
    if x.signed_distance(a) < r {
        return Err(Error::InvalidConfig("closed ball B(a, r) is not inside X".into()));
    }
    let (int, bad) = poisson_integral(|z: &ComplexVector| z.dist(a).ln(), f, grid, x)?;
    debug_assert!(int.is_finite(), "f hit the centre a outside X");
    Ok(int - bad * r.ln())
}

/// |∫_T log|p_0| dσ - log|p_0(0)| - J(f)|, which vanishes by Jensen's formula.
pub fn riesz_residual(f: &RationalDisc, grid: &CircleGrid) -> Result<f64> {
    let p0 = &f.components()[0];
    let c0 = p0.eval(Complex64::new(0.0, 0.0));
    if c0.norm() == 0.0 {
        return Err(Error::CentreAtInfinity);
    }
    let j = J(f)?;
    let mean = grid.mean(|z| p0.eval(z).norm().ln());
    Ok((mean - c0.norm().ln() - j).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discs::{make_polynomial_disc, make_touching_disc};
    use crate::poly::Polynomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_disc() -> Domain {
        Domain::ball(ComplexVector::zeros(1), 1.0).unwrap()
    }

    fn ebj_unit(z: &ComplexVector) -> f64 {
        z.norm().ln().max(0.0)
    }

    #[test]
    fn j_examples() {
        let z = ComplexVector::new(vec![c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        let f = make_touching_disc(&z, &ComplexVector::zeros(2), 1.0).unwrap();
        assert!((J(&f).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        let p0 = Polynomial::from_roots(&[c(0.3, 0.0), c(0.3, 0.0)]).mul(&Polynomial::constant(c(2.0, 1.0)));
        let g = RationalDisc::new(vec![p0, Polynomial::new(vec![c(1.0, 0.0), c(0.0, 1.0)])]).unwrap();
        assert!((J(&g).unwrap() - 2.407_945_608_651_872).abs() < 1e-9);
        assert!(riesz_residual(&g, &CircleGrid::new(2048).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn poisson_examples() {
        let x = unit_disc();
        let grid = CircleGrid::new(1024).unwrap();
        let inside = make_polynomial_disc(&ComplexVector::zeros(1), &[ComplexVector::scalar(c(0.5, 0.0))]).unwrap();
        assert_eq!(poisson_integral(ebj_unit, &inside, &grid, &x).unwrap(), (0.0, 0.0));
        let z = ComplexVector::scalar(c(3.0, 0.0));
        let k = RationalDisc::constant(&z);
        let (v, bad) = poisson_integral(ebj_unit, &k, &grid, &x).unwrap();
        assert!((v - 3f64.ln()).abs() < 1e-12 && bad == 1.0);
        let two = make_polynomial_disc(&ComplexVector::zeros(1), &[ComplexVector::scalar(c(2.0, 0.0))]).unwrap();
        let (v, _) = poisson_integral(ebj_unit, &two, &grid, &x).unwrap();
        assert!((v - 2f64.ln()).abs() < 2e-3);
    }

    #[test]
    fn refined_quadrature_is_accurate_on_partial_arcs() {
        // f(ζ) = 0.5 + ζ: log|0.5 + ζ| integrated where |0.5 + ζ| > 1
        let x = unit_disc();
        let f = make_polynomial_disc(&ComplexVector::scalar(c(0.5, 0.0)), &[ComplexVector::scalar(c(1.0, 0.0))]).unwrap();
        let (coarse, _) = poisson_integral_refined(ebj_unit, &f, &CircleGrid::new(64).unwrap(), &x).unwrap();
        // reference: fine midpoint rule in angle
        let m = 2_000_000;
        let fine: f64 = (0..m)
            .map(|k| {
                let t = TAU * (k as f64 + 0.5) / m as f64;
                (Complex64::from_polar(1.0, t) + 0.5).norm().ln().max(0.0)
            })
            .sum::<f64>()
            / m as f64;
        assert!((coarse - fine).abs() < 1e-9, "{coarse} vs {fine}");
    }

    #[test]
    fn h_b_examples() {
        let x = unit_disc();
        let grid = CircleGrid::new(256).unwrap();
        let k = RationalDisc::constant(&ComplexVector::scalar(c(0.2, 0.1)));
        assert_eq!(H_B(&k, &x, ebj_unit, &grid).unwrap().value, 0.0);
        let f = make_touching_disc(&ComplexVector::scalar(c(3.0, 0.0)), &ComplexVector::scalar(c(0.1, 0.0)), 0.8).unwrap();
        let v = H_B(&f, &x, ebj_unit, &grid).unwrap();
        assert!((v.value - (2.9f64 / 0.8).ln()).abs() < 1e-12);
        assert_eq!(v.poisson_part, 0.0);
    }

    #[test]
    fn h_r_examples() {
        let x = unit_disc();
        let grid = CircleGrid::new(1024).unwrap();
        let a = ComplexVector::zeros(1);
        let z = ComplexVector::scalar(c(0.0, 4.0));
        let k = RationalDisc::constant(&z);
        assert!((H_r(&k, &x, &a, 0.5, &grid).unwrap() - 8f64.ln()).abs() < 1e-12);
        let two = make_polynomial_disc(&a, &[ComplexVector::scalar(c(2.0, 0.0))]).unwrap();
        assert!((H_r(&two, &x, &a, 0.5, &grid).unwrap() - 2.0 * 2f64.ln()).abs() < 2e-3);
        let small = make_polynomial_disc(&a, &[ComplexVector::scalar(c(0.5, 0.0))]).unwrap();
        assert_eq!(H_r(&small, &x, &a, 0.5, &grid).unwrap(), 0.0);
    }

    #[test]
    fn riesz_trivial_cases() {
        let grid = CircleGrid::new(2048).unwrap();
        let f = RationalDisc::new(vec![Polynomial::linear_root(c(0.5, 0.0)), Polynomial::constant(c(1.0, 0.0))]).unwrap();
        assert!(riesz_residual(&f, &grid).unwrap() < 1e-14);
        let k = RationalDisc::constant(&ComplexVector::scalar(c(1.0, 2.0)));
        assert_eq!(riesz_residual(&k, &grid).unwrap(), 0.0);
    }
}
