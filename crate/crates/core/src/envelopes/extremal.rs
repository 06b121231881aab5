//! Almost extremal discs: centred at z, with all but a small part of the
//! circle mapped into X∖K.
//!
//! Candidates are polynomial discs `f = c + (z - c) E(ζ)` in the complex
//! line through c and z, where `E = exp(G)` and Re G on T is a smoothed step:
//! on a "good" arc |f - c| = ρ, a circle inside X∖K, and on the remaining
//! arc the modulus is whatever makes the mean of Re G vanish, so E(0) = 1.
//! E is truncated to the configured degree.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{EbjField, Estimator, OptimizerConfig};
use crate::discs::{smoothstep, RationalDisc};
use crate::domains::{dist, Domain};
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::poly::Polynomial;
use crate::primitives::ComplexVector;

/// Number of halvings of the schedule radius.
const SCHEDULE_STEPS: usize = 8;

#[derive(Debug, Clone)]
pub struct AlmostExtremal {
    pub disc: RationalDisc,
    /// ∫_{T∖f⁻¹(X)} E_B J∘f dσ.
    pub h_value: f64,
    /// σ(T∖f⁻¹(X∖K)).
    pub bad_measure: f64,
    /// Radius of the schedule ball at which the disc was found.
    pub radius: f64,
    /// Estimate of V_X(z) the value was compared against.
    pub v_estimate: f64,
    /// Whether both tolerances were met.
    pub met: bool,
}

/// Circle `|w - c| = ρ` with `ρ ∈ (lo, hi)` lying in X∖K.
#[derive(Debug, Clone)]
struct Anchor {
    c: ComplexVector,
    lo: f64,
    hi: f64,
}

struct Builder<'a> {
    x: &'a Domain,
    k_centre: &'a ComplexVector,
    k_radius: f64,
    z: &'a ComplexVector,
    degree: usize,
    n_build: usize,
    n_eval: usize,
    planner: std::cell::RefCell<FftPlanner<f64>>,
}

/// Boundary values on the evaluation grid and the coefficients of E.
struct Built {
    values: Vec<Vec<Complex64>>,
    coeffs: Vec<Complex64>,
}

impl Builder<'_> {
    fn in_good_set(&self, w: &[Complex64]) -> bool {
        self.x.contains_coords(w) && dist(w, self.k_centre.coords()) > self.k_radius
    }

    /// Shape parameters p = (ℓ, η, τ): the bad arc has half-width πℓ, the
    /// transitions width τ, and ρ = lo + (hi - lo) e^{-η}.
    fn build(&self, anchor: &Anchor, p: &[f64]) -> Option<Built> {
        let (ell, eta, tau) = (p[0], p[1], p[2]);
        if !(1e-3..=0.45).contains(&ell) || !(1e-4..=5.0).contains(&eta) || !(0.01..=1.0).contains(&tau) {
            return None;
        }
        if PI * ell + tau > PI - 0.01 {
            return None;
        }
        let l = self.z.dist(&anchor.c);
        let rho = anchor.lo + (anchor.hi - anchor.lo) * (-eta).exp();
        let ug = (rho / l).ln();
        let n = self.n_build;
        let s: Vec<f64> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                let d = t.min(TAU - t);
                1.0 - smoothstep((d - PI * ell) / tau)
            })
            .collect();
        let mean_s = s.iter().sum::<f64>() / n as f64;
        let cb = ug - ug / mean_s;
        let mut buf: Vec<Complex64> = s.iter().map(|&si| Complex64::new(ug + (cb - ug) * si, 0.0)).collect();
        let mut planner = self.planner.borrow_mut();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        fwd.process(&mut buf);
        // analytic completion of the real boundary values
        let scale = 1.0 / n as f64;
        buf[0] = Complex64::new(0.0, 0.0);
        for (k, b) in buf.iter_mut().enumerate().skip(1) {
            *b = if k < n / 2 { *b * (2.0 * scale) } else { Complex64::new(0.0, 0.0) };
        }
        inv.process(&mut buf);
        for b in buf.iter_mut() {
            *b = b.exp();
        }
        fwd.process(&mut buf);
        let mut coeffs: Vec<Complex64> = buf[..=self.degree].iter().map(|c| c * scale).collect();
        coeffs[0] = Complex64::new(1.0, 0.0);
        let m = self.n_eval;
        let mut ev = vec![Complex64::new(0.0, 0.0); m];
        ev[..coeffs.len()].copy_from_slice(&coeffs);
        planner.plan_fft_inverse(m).process(&mut ev);
        let diff = self.z - &anchor.c;
        let values = ev
            .iter()
            .map(|e| (0..self.z.dim()).map(|i| anchor.c[i] + diff[i] * e).collect())
            .collect();
        Some(Built { values, coeffs })
    }

    fn bad_measure(&self, b: &Built) -> f64 {
        b.values.iter().filter(|w| !self.in_good_set(w)).count() as f64 / b.values.len() as f64
    }

    /// H_r relative to X∖K and the ball B(a, r).
    fn h_r(&self, b: &Built, a: &ComplexVector, r: f64) -> f64 {
        let total: f64 = b
            .values
            .iter()
            .filter(|w| !self.in_good_set(w))
            .map(|w| (dist(w, a.coords()) / r).ln())
            .sum();
        total / b.values.len() as f64
    }

    fn h_value(&self, b: &Built, field: &EbjField) -> f64 {
        let total: f64 = b
            .values
            .iter()
            .filter(|w| !self.x.contains_coords(w))
            .map(|w| field.value_coords(w))
            .sum();
        total / b.values.len() as f64
    }

    fn disc(&self, b: &Built, anchor: &Anchor) -> Result<RationalDisc> {
        let diff = self.z - &anchor.c;
        let mut comps = vec![Polynomial::constant(Complex64::new(1.0, 0.0))];
        for i in 0..self.z.dim() {
            let mut c: Vec<Complex64> = b.coeffs.iter().map(|e| diff[i] * e).collect();
            c[0] = self.z[i];
            comps.push(Polynomial::new(c));
        }
        RationalDisc::new(comps)
    }
}

/// Centre and radius of a large ball in X∖K.
fn schedule_ball(x: &Domain, k_centre: &ComplexVector, k_radius: f64) -> (ComplexVector, f64) {
    let depth = |p: &[f64]| -> f64 {
        let w = ComplexVector::from_reals(p).expect("even length");
        -x.signed_distance(&w).min(w.dist(k_centre) - k_radius)
    };
    let (c, _) = x.inscribed_ball();
    let gap = 0.5 * (x.signed_distance(k_centre) + k_radius);
    let mut starts = vec![c.to_reals()];
    for j in 0..2 * x.dim() {
        for sign in [1.0, -1.0] {
            let mut p = k_centre.to_reals();
            p[j] += sign * gap;
            starts.push(p);
        }
    }
    let opts = NelderMeadOptions {
        max_evals: 400 * starts[0].len(),
        ftol: 1e-12,
        xtol: 1e-12,
    };
    let mut best = (c.clone(), f64::NEG_INFINITY);
    for s in starts {
        let m = nelder_mead(depth, &s, &vec![0.1 * gap.max(1e-3); s.len()], &opts);
        if -m.f > best.1 {
            best = (ComplexVector::from_reals(&m.x).expect("even"), -m.f);
        }
    }
    best
}

/// Run a halving schedule of balls B(a, r) ⊂ X∖K; at each radius minimize
/// H_r over the disc family and stop once σ(T∖f⁻¹(X∖K)) < ε and the
/// H value is below `v + ε`, v being the polynomial-disc envelope of E_B J
/// at z. K is the closed ball
/// `B̄(k_centre, k_radius)`. When the schedule runs out the best disc found
/// is returned with `met = false`.
pub fn almost_extremal_disc(
    x: &Domain,
    k_centre: &ComplexVector,
    k_radius: f64,
    z: &ComplexVector,
    eps: f64,
    opt: &OptimizerConfig,
) -> Result<AlmostExtremal> {
    opt.validate()?;
    z.check_dim(x.dim())?;
    k_centre.check_dim(x.dim())?;
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("ε must be positive, got {eps}")));
    }
    if !(k_radius >= 0.0) || x.signed_distance(k_centre) <= k_radius {
        return Err(Error::InvalidConfig("K must be a closed ball inside X".into()));
    }
    if x.contains_unchecked(z) && z.dist(k_centre) > k_radius {
        return Ok(AlmostExtremal {
            disc: RationalDisc::constant(z),
            h_value: 0.0,
            bad_measure: 0.0,
            radius: 0.0,
            v_estimate: 0.0,
            met: true,
        });
    }
    let (a, big_r) = schedule_ball(x, k_centre, k_radius);
    if !(big_r > 0.0) {
        return Err(Error::InvalidConfig("X∖K contains no ball".into()));
    }
    let est = Estimator::new(x, opt)?;
    let v_estimate = est.theorem2(z)?.value;
    let field = est.field();
    let degree = opt.extremal_degree;
    let b = Builder {
        x,
        k_centre,
        k_radius,
        z,
        degree,
        n_build: 8 * degree.next_power_of_two(),
        n_eval: 16 * degree.next_power_of_two(),
        planner: std::cell::RefCell::new(FftPlanner::new()),
    };
    let outer = x.signed_distance(k_centre);
    // narrow bad arcs need high degree; the wide one works at any degree
    let starts: [[f64; 3]; 3] = [[0.05, 0.02, 0.1], [0.03, 0.02, 0.15], [0.25, 0.05, 0.3]];
    let nm = NelderMeadOptions {
        max_evals: opt.max_evals.min(200),
        ftol: 1e-8,
        xtol: 1e-6,
    };
    let mut best: Option<(f64, AlmostExtremal)> = None;
    let mut r = big_r;
    for _ in 0..SCHEDULE_STEPS {
        let mut anchors = vec![Anchor {
            c: a.clone(),
            lo: 0.0,
            hi: r,
        }];
        if outer > k_radius {
            anchors.push(Anchor {
                c: k_centre.clone(),
                lo: k_radius,
                hi: outer,
            });
        }
        let mut step_best: Option<(f64, Anchor, Vec<f64>)> = None;
        for anchor in anchors.iter().filter(|an| z.dist(&an.c) > 1e-12) {
            for s in &starts {
                let obj = |p: &[f64]| b.build(anchor, p).map_or(f64::INFINITY, |built| b.h_r(&built, &a, r));
                let m = nelder_mead(obj, s, &[0.01, 0.01, 0.03], &nm);
                if step_best.as_ref().is_none_or(|sb| m.f < sb.0) {
                    step_best = Some((m.f, anchor.clone(), m.x));
                }
            }
        }
        let Some((_, anchor, p)) = step_best else {
            return Err(Error::InvalidConfig("z coincides with every anchor".into()));
        };
        let built = b.build(&anchor, &p).expect("optimum lies in the family");
        let bad = b.bad_measure(&built);
        let h = b.h_value(&built, field);
        let met = bad < eps && h < v_estimate + eps;
        let out = AlmostExtremal {
            disc: b.disc(&built, &anchor)?,
            h_value: h,
            bad_measure: bad,
            radius: r,
            v_estimate,
            met,
        };
        if met {
            return Ok(out);
        }
        // rank unmet steps by their combined excess
        let score = (bad - eps).max(0.0) + (h - v_estimate - eps).max(0.0);
        if best.as_ref().is_none_or(|bb| score < bb.0) {
            best = Some((score, out));
        }
        r *= 0.5;
    }
    Ok(best.expect("schedule is nonempty").1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> ComplexVector {
        ComplexVector::new(vec![Complex64::new(re, 0.0)]).unwrap()
    }

    #[test]
    fn constant_disc_inside() {
        let x = Domain::ball(c(0.0), 1.0).unwrap();
        let out = almost_extremal_disc(&x, &c(0.0), 0.2, &c(0.5), 0.1, &OptimizerConfig::default()).unwrap();
        assert_eq!(out.bad_measure, 0.0);
        assert!(out.met);
    }

    #[test]
    fn vacuous_tolerance_met_at_first_radius() {
        let x = Domain::ball(c(0.0), 1.0).unwrap();
        let cfg = OptimizerConfig {
            extremal_degree: 64,
            max_evals: 40,
            ..OptimizerConfig::default()
        };
        let out = almost_extremal_disc(&x, &c(0.0), 0.2, &c(2.0), 1.0, &cfg).unwrap();
        assert!(out.met, "bad {} h {} v {}", out.bad_measure, out.h_value, out.v_estimate);
        assert!((out.radius - 0.4).abs() < 1e-6, "radius {}", out.radius);
        let centre = out.disc.centre().unwrap();
        assert_eq!(centre[0], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn rejects_k_outside() {
        let x = Domain::ball(c(0.0), 1.0).unwrap();
        assert!(almost_extremal_disc(&x, &c(0.9), 0.2, &c(2.0), 0.1, &OptimizerConfig::default()).is_err());
    }
}
