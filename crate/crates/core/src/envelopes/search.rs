//! Parametrized disc families, penalized multi-start Nelder-Mead and the
//! fine-grid feasibility check.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::OptimizerConfig;
use crate::discs::{make_polynomial_disc, RationalDisc};
use crate::domains::Domain;
use crate::error::Result;
use crate::optimize::{nelder_mead, perturb, restart_rng, NelderMeadOptions};
use crate::poly::Polynomial;
use crate::primitives::{CircleGrid, ComplexVector};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
/// Poles closer to T than this (in log-modulus) are rejected.
const POLE_GAP: f64 = 1e-9;
/// Modulus of the auxiliary poles used to embed a one-pole seed into a
/// family with more poles; the matching zero of g cancels them.
const AUX_POLE: f64 = 0.9999;

/// A finite-dimensional family of discs centred at a fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Family {
    /// `p_0 = Π(ζ - ζ_p)`, `p_i = p_0 z_i + ζ g_i(ζ)`. Parameters are
    /// `(log|ζ_p|, arg ζ_p)` per pole, then the coefficients of g.
    Poles { poles: usize, gdeg: usize },
    /// `f_i = z_i + Σ_{k=1..d} c_{k,i} ζ^k`.
    Poly { degree: usize },
}

impl Family {
    pub(crate) fn len(&self, n: usize) -> usize {
        match *self {
            Family::Poles { poles, gdeg } => 2 * poles + 2 * n * (gdeg + 1),
            Family::Poly { degree } => 2 * n * degree,
        }
    }

    fn coeff_offset(&self) -> usize {
        match *self {
            Family::Poles { poles, .. } => 2 * poles,
            Family::Poly { .. } => 0,
        }
    }

    fn coeff_count(&self) -> usize {
        match *self {
            Family::Poles { gdeg, .. } => gdeg + 1,
            Family::Poly { degree } => degree,
        }
    }

    fn poles(&self, x: &[f64]) -> Option<Vec<Complex64>> {
        match *self {
            Family::Poles { poles, .. } => (0..poles)
                .map(|p| {
                    let s = x[2 * p];
                    (s < -POLE_GAP && s > -40.0).then(|| Complex64::from_polar(s.exp(), x[2 * p + 1]))
                })
                .collect(),
            Family::Poly { .. } => Some(Vec::new()),
        }
    }

    /// Upper bound for J: the poles might cancel against common zeros.
    pub(crate) fn j_bound(&self, x: &[f64]) -> f64 {
        match *self {
            Family::Poles { poles, .. } => (0..poles).map(|p| -x[2 * p]).sum(),
            Family::Poly { .. } => 0.0,
        }
    }

    fn coeff(&self, x: &[f64], n: usize, k: usize, i: usize) -> Complex64 {
        let j = self.coeff_offset() + 2 * (k * n + i);
        Complex64::new(x[j], x[j + 1])
    }

    /// Affine boundary values at `nodes`, written row-major into `out`.
    /// Returns false when the parameters leave the family.
    pub(crate) fn eval_nodes(&self, z: &[Complex64], x: &[f64], nodes: &[Complex64], out: &mut Vec<Complex64>) -> bool {
        let n = z.len();
        let Some(poles) = self.poles(x) else {
            return false;
        };
        let m = self.coeff_count();
        out.clear();
        for &zeta in nodes {
            let p0: Complex64 = poles.iter().map(|r| zeta - r).product();
            let factor = match self {
                Family::Poles { .. } => zeta / p0,
                Family::Poly { .. } => zeta,
            };
            for (i, zi) in z.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in (0..m).rev() {
                    acc = acc * zeta + self.coeff(x, n, k, i);
                }
                out.push(zi + factor * acc);
            }
        }
        true
    }

    pub(crate) fn build(&self, z: &ComplexVector, x: &[f64]) -> Result<RationalDisc> {
        let n = z.dim();
        match *self {
            Family::Poles { gdeg, .. } => {
                let poles = self.poles(x).ok_or(crate::error::Error::PoleOutsideDisc { pole_modulus: 1.0 })?;
                let p0 = Polynomial::from_roots(&poles);
                let mut comps = vec![p0.clone()];
                for i in 0..n {
                    let g = Polynomial::new((0..=gdeg).map(|k| self.coeff(x, n, k, i)).collect());
                    comps.push(p0.scale(z[i]).add(&g.shift(1)));
                }
                RationalDisc::new(comps)
            }
            Family::Poly { degree } => {
                let c: Vec<ComplexVector> = (0..degree)
                    .map(|k| ComplexVector::new((0..n).map(|i| self.coeff(x, n, k, i)).collect()))
                    .collect::<Result<_>>()?;
                make_polynomial_disc(z, &c)
            }
        }
    }

    /// Re-express `x` from `from` in this (larger) family by zero padding.
    pub(crate) fn embed(&self, from: &Family, x: &[f64], n: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.len(n)];
        let (a, b) = (from.coeff_offset(), self.coeff_offset());
        y[..a.min(b)].copy_from_slice(&x[..a.min(b)]);
        for k in 0..from.coeff_count().min(self.coeff_count()) {
            for i in 0..2 * n {
                y[b + 2 * k * n + i] = x[a + 2 * k * n + i];
            }
        }
        y
    }

    pub(crate) fn steps(&self, n: usize, scale: f64) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.len(n));
        if let Family::Poles { poles, .. } = *self {
            s.extend(std::iter::repeat_n(0.05, 2 * poles));
        }
        for k in 0..self.coeff_count() {
            s.extend(std::iter::repeat_n(0.1 * scale / (k + 1) as f64, 2 * n));
        }
        s
    }
}

/// Parameters of the touching disc f_{z,w,r} in a pole family: the pole
/// ζ0 = -r/‖z-w‖ and g ≡ (ζ0² - 1)(z - w), times the factors of any extra
/// poles placed near T.
pub(crate) fn touching_params(fam: &Family, z: &ComplexVector, w: &ComplexVector, r: f64) -> Vec<f64> {
    let Family::Poles { poles, gdeg } = *fam else {
        panic!("touching discs need a pole family");
    };
    let n = z.dim();
    let l = z.dist(w);
    let zeta0 = -r / l;
    let mut x = vec![0.0; fam.len(n)];
    x[0] = (r / l).ln();
    x[1] = PI;
    let mut extra = Polynomial::constant(ONE);
    for q in 1..poles {
        let phi = 2.0 * PI * q as f64 / poles as f64 + 0.5;
        x[2 * q] = AUX_POLE.ln();
        x[2 * q + 1] = phi;
        extra = extra.mul(&Polynomial::linear_root(Complex64::from_polar(AUX_POLE, phi)));
    }
    let diff = z - w;
    for (k, e) in extra.coeffs().iter().enumerate().take(gdeg + 1) {
        for i in 0..n {
            let c = e * diff[i] * (zeta0 * zeta0 - 1.0);
            let j = 2 * poles + 2 * (k * n + i);
            x[j] = c.re;
            x[j + 1] = c.im;
        }
    }
    x
}

/// `min_k sd(f(ζ_k))` on `nodes` equally spaced nodes, and whether a
/// conservative bound for the dips between nodes stays positive.
pub(crate) fn verify_inside(f: &RationalDisc, x: &Domain, nodes: usize) -> (bool, f64) {
    let grid = CircleGrid::new(nodes).expect("at least 8 nodes");
    let mut sd = Vec::with_capacity(nodes);
    for &zeta in grid.nodes() {
        match f.eval_affine(zeta) {
            Some(p) if p.dim() == x.dim() => sd.push(x.signed_distance(&p)),
            _ => return (false, f64::NEG_INFINITY),
        }
    }
    let min = sd.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return (false, min);
    }
    let m = sd.len();
    let curv: Vec<f64> = (0..m)
        .map(|k| (sd[(k + m - 1) % m] - 2.0 * sd[k] + sd[(k + 1) % m]).abs())
        .collect();
    let ok = (0..m).all(|k| {
        let k1 = (k + 1) % m;
        sd[k].min(sd[k1]) - curv[k].max(curv[k1]) / 8.0 > 1e-12
    });
    (ok, min)
}

/// Objective to minimize over a family.
pub(crate) enum Goal<'a> {
    /// J bound plus μ·mean(max(0, margin - sd)²) over the nodes.
    Inside { mu: f64, margin: f64 },
    /// J bound plus the mean of `field` over the nodes; the field must
    /// vanish on X.
    Poisson(&'a (dyn Fn(&[Complex64]) -> f64 + Sync)),
}

pub(crate) struct Problem<'a> {
    pub x: &'a Domain,
    pub z: &'a ComplexVector,
    pub goal: Goal<'a>,
    pub nodes: Vec<Complex64>,
}

impl Problem<'_> {
    pub(crate) fn objective(&self, fam: &Family, p: &[f64], buf: &mut Vec<Complex64>) -> f64 {
        if !fam.eval_nodes(self.z.coords(), p, &self.nodes, buf) {
            return f64::INFINITY;
        }
        let n = self.z.dim();
        let count = self.nodes.len() as f64;
        let extra: f64 = match &self.goal {
            Goal::Inside { mu, margin } => {
                let pen: f64 = buf
                    .chunks(n)
                    .map(|w| (margin - self.x.sd_coords(w)).max(0.0).powi(2))
                    .sum();
                mu * pen / count
            }
            Goal::Poisson(field) => buf.chunks(n).map(field).sum::<f64>() / count,
        };
        fam.j_bound(p) + extra
    }
}

/// A local optimum (or seed) in a given family.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub family: Family,
    pub x: Vec<f64>,
    pub objective: f64,
    /// A parameter vector in the same family known to be feasible.
    pub anchor: Option<Vec<f64>>,
}

pub(crate) struct SearchRun {
    pub candidates: Vec<Candidate>,
    pub iterations: usize,
    pub restarts: usize,
}

/// Stage-wise multi-start search. `seeds(stage)` yields starting points
/// (with an optional feasible anchor) in that stage's family; the best
/// point of each stage is also carried into the next one.
pub(crate) fn staged_search<S>(
    prob: &Problem,
    stages: &[Family],
    seeds: S,
    scale: f64,
    cfg: &OptimizerConfig,
    point: u64,
    stream: u64,
) -> SearchRun
where
    S: Fn(&Family) -> Vec<(Vec<f64>, Option<Vec<f64>>)>,
{
    let n = prob.z.dim();
    let opts = NelderMeadOptions {
        max_evals: cfg.max_evals,
        ftol: cfg.tol,
        xtol: cfg.tol,
    };
    let mut buf = Vec::new();
    let mut run = SearchRun {
        candidates: Vec::new(),
        iterations: 0,
        restarts: 0,
    };
    let mut carried: Option<Candidate> = None;
    for (si, fam) in stages.iter().enumerate() {
        let mut starts = seeds(fam);
        if let Some(prev) = &carried {
            starts.insert(0, (fam.embed(&prev.family, &prev.x, n), prev.anchor.as_ref().map(|a| fam.embed(&prev.family, a, n))));
        }
        if starts.is_empty() {
            continue;
        }
        for (s, anchor) in &starts {
            let objective = prob.objective(fam, s, &mut buf);
            run.candidates.push(Candidate {
                family: *fam,
                x: s.clone(),
                objective,
                anchor: anchor.clone(),
            });
        }
        let step = fam.steps(n, scale);
        let mut stage_best: Option<Candidate> = None;
        for r in 0..cfg.restarts {
            let (base, anchor) = &starts[r % starts.len()];
            let x0 = if r < starts.len() {
                base.clone()
            } else {
                let mut rng = restart_rng(cfg.seed, point ^ (stream << 48), (si * 1000 + r) as u64);
                perturb(&mut rng, base, &step)
            };
            let m = nelder_mead(|p| prob.objective(fam, p, &mut Vec::new()), &x0, &step, &opts);
            run.iterations += m.iterations;
            run.restarts += 1;
            let c = Candidate {
                family: *fam,
                x: m.x,
                objective: m.f,
                anchor: anchor.clone(),
            };
            if stage_best.as_ref().is_none_or(|b| c.objective < b.objective) {
                stage_best = Some(c.clone());
            }
            run.candidates.push(c);
        }
        if let Some(b) = stage_best {
            if carried.as_ref().is_none_or(|c| b.objective <= c.objective) {
                carried = Some(b);
            }
        }
    }
    run
}

/// Largest t ∈ [0, 1] (by bisection) such that the disc at
/// `anchor + t (target - anchor)` passes verification.
pub(crate) fn restore(
    fam: &Family,
    z: &ComplexVector,
    x: &Domain,
    anchor: &[f64],
    target: &[f64],
    verify_nodes: usize,
) -> Option<(RationalDisc, Vec<f64>)> {
    let at = |t: f64| -> Vec<f64> { anchor.iter().zip(target).map(|(a, b)| a + t * (b - a)).collect() };
    let check = |p: &[f64]| -> Option<RationalDisc> {
        let f = fam.build(z, p).ok()?;
        verify_inside(&f, x, verify_nodes).0.then_some(f)
    };
    let mut best = check(anchor).map(|f| (f, anchor.to_vec()))?;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        let p = at(mid);
        match check(&p) {
            Some(f) => {
                lo = mid;
                best = (f, p);
            }
            None => hi = mid,
        }
    }
    Some(best)
}

/// Deterministic 64-bit tag of a point, used to derive restart RNGs.
pub(crate) fn point_id(z: &ComplexVector) -> u64 {
    // FNV-1a over the coordinate bits
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for c in z.coords() {
        for v in [c.re.to_bits(), c.im.to_bits()] {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discs::{make_touching_disc, J};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn touching_params_reproduce_the_touching_disc() {
        let z = ComplexVector::new(vec![c(2.0, 1.0), c(0.0, -1.0)]).unwrap();
        let w = ComplexVector::new(vec![c(0.5, 0.0), c(0.1, 0.2)]).unwrap();
        let r = 0.7;
        let reference = make_touching_disc(&z, &w, r).unwrap();
        for fam in [Family::Poles { poles: 1, gdeg: 0 }, Family::Poles { poles: 2, gdeg: 3 }] {
            let x = touching_params(&fam, &z, &w, r);
            let f = fam.build(&z, &x).unwrap();
            assert!((J(&f).unwrap() - J(&reference).unwrap()).abs() < 1e-9);
            let mut buf = Vec::new();
            let grid = CircleGrid::new(16).unwrap();
            assert!(fam.eval_nodes(z.coords(), &x, grid.nodes(), &mut buf));
            for (k, &zeta) in grid.nodes().iter().enumerate() {
                let want = reference.eval_affine(zeta).unwrap();
                for i in 0..2 {
                    assert!((buf[2 * k + i] - want[i]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn verification_catches_dips_between_nodes() {
        let x = Domain::ball(ComplexVector::zeros(1), 1.0).unwrap();
        // 0.5 + b e^{-iπ/16} ζ peaks halfway between two of 16 nodes
        let disc = |b: f64| {
            let lin = vec![c(0.5, 0.0), Complex64::from_polar(b, -PI / 16.0)];
            RationalDisc::new(vec![Polynomial::constant(ONE), Polynomial::new(lin)]).unwrap()
        };
        let grid = CircleGrid::new(16).unwrap();
        let bad = disc(0.5008);
        assert!(grid.nodes().iter().all(|&t| bad.eval_affine(t).unwrap().norm() < 1.0));
        assert!(!verify_inside(&bad, &x, 16).0);
        assert!(verify_inside(&disc(0.45), &x, 16).0);
    }

    #[test]
    fn embedding_preserves_the_disc() {
        let z = ComplexVector::new(vec![c(3.0, 0.0)]).unwrap();
        let small = Family::Poly { degree: 2 };
        let big = Family::Poly { degree: 5 };
        let x = vec![0.1, 0.2, -0.3, 0.4];
        let y = big.embed(&small, &x, 1);
        let (a, b) = (small.build(&z, &x).unwrap(), big.build(&z, &y).unwrap());
        let zeta = c(0.3, -0.8);
        assert!((a.eval_affine(zeta).unwrap()[0] - b.eval_affine(zeta).unwrap()[0]).norm() < 1e-15);
    }
}
