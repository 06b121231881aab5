//! Envelope estimators: constrained minimization of disc functionals over
//! parametrized disc classes.

mod ebj;
mod extremal;
mod search;
mod validate;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use ebj::EbjField;
pub use extremal::{almost_extremal_disc, AlmostExtremal};
pub use validate::{validate_disc_class, CentreCheck, ClassReport};

use crate::discs::{make_touching_disc, RationalDisc, J};
use crate::domains::{dist, Domain};
use crate::error::{Error, Result};
use crate::functionals::{poisson_integral, poisson_integral_refined};
use crate::primitives::{CircleGrid, ComplexVector};
use search::{point_id, restore, staged_search, touching_params, verify_inside, Candidate, Family, Goal, Problem, SearchRun};

/// Which search produced a candidate; also separates the RNG streams so
/// that a search gives the same result standalone and inside `theorem1`.
#[derive(Debug, Clone, Copy)]
enum Stream {
    OnePole = 1,
    MultiPole = 2,
    PoleFunctional = 3,
    Polynomial = 4,
    Hr = 5,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Function evaluations per Nelder-Mead run.
    pub max_evals: usize,
    /// Weight μ of the squared boundary violations.
    pub penalty: f64,
    pub seed: u64,
    /// Quadrature nodes N on the circle; feasibility is verified at 4N.
    pub nodes: usize,
    pub tol: f64,
    /// Degree budget for the searched discs.
    pub degree: usize,
    /// Pole budget for the boundary-in-X class.
    pub poles: usize,
    /// Required signed distance from ∂X at the optimization nodes.
    pub margin: f64,
    /// Degree of the discs built by [`almost_extremal_disc`].
    pub extremal_degree: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_evals: 2000,
            penalty: 1e6,
            seed: 0,
            nodes: 256,
            tol: 1e-10,
            degree: 16,
            poles: 2,
            margin: 1e-6,
            extremal_degree: 1024,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("restarts", self.restarts),
            ("max_evals", self.max_evals),
            ("degree", self.degree),
            ("poles", self.poles),
            ("extremal_degree", self.extremal_degree),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.nodes < 8 {
            return Err(Error::InvalidConfig(format!("need at least 8 nodes, got {}", self.nodes)));
        }
        for (name, v) in [("penalty", self.penalty), ("tol", self.tol), ("margin", self.margin)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.poles > self.degree {
            return Err(Error::InvalidConfig("pole budget exceeds the degree budget".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    /// Constants in X and the touching discs f_{z,w,r}.
    TouchingBalls,
    /// Boundary in X, at most one simple pole.
    OnePole,
    /// Boundary in X, any number of poles up to the budget.
    BoundaryInX,
    /// Polynomial discs into C^n.
    Affine,
    AllProjective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscClass {
    pub tag: ClassTag,
    pub degree: usize,
    pub poles: usize,
}

impl DiscClass {
    pub fn one_pole(degree: usize) -> Self {
        Self {
            tag: ClassTag::OnePole,
            degree,
            poles: 1,
        }
    }

    pub fn boundary_in_x(degree: usize, poles: usize) -> Self {
        Self {
            tag: ClassTag::BoundaryInX,
            degree,
            poles,
        }
    }

    pub fn touching_balls() -> Self {
        Self {
            tag: ClassTag::TouchingBalls,
            degree: 1,
            poles: 1,
        }
    }

    pub fn affine(degree: usize) -> Self {
        Self {
            tag: ClassTag::Affine,
            degree,
            poles: 0,
        }
    }

    pub fn all_projective(degree: usize, poles: usize) -> Self {
        Self {
            tag: ClassTag::AllProjective,
            degree,
            poles,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnvelopeEstimate {
    pub value: f64,
    pub best_disc: RationalDisc,
    /// All constraints hold at the verification resolution.
    pub feasible: bool,
    pub iterations: usize,
    pub restarts: usize,
    /// The value is a functional of an admissible disc, hence ≥ V_X(z).
    pub certified_upper_bound: bool,
    pub j_part: f64,
    pub poisson_part: f64,
}

impl EnvelopeEstimate {
    fn constant(z: &ComplexVector) -> Self {
        Self {
            value: 0.0,
            best_disc: RationalDisc::constant(z),
            feasible: true,
            iterations: 0,
            restarts: 0,
            certified_upper_bound: true,
            j_part: 0.0,
            poisson_part: 0.0,
        }
    }
}

const POLE_STAGES: [usize; 5] = [0, 1, 3, 7, 15];
const POLY_STAGES: [usize; 5] = [1, 2, 4, 8, 16];
/// Candidates per search that get the exact (expensive) evaluation.
const EXACT_EVALS: usize = 4;
/// Relative shrink of the touching-disc radius below d(w, ∂X).
const TOUCH_DELTA: f64 = 1e-10;

fn pole_stages(poles: usize, degree: usize) -> Vec<Family> {
    let mut g: Vec<usize> = POLE_STAGES
        .iter()
        .copied()
        .filter(|&g| g + 1 >= poles && g < degree)
        .collect();
    if g.is_empty() {
        g.push(poles.saturating_sub(1));
    }
    g.into_iter().map(|gdeg| Family::Poles { poles, gdeg }).collect()
}

fn poly_stages(degree: usize) -> Vec<Family> {
    let mut d: Vec<usize> = POLY_STAGES.iter().copied().filter(|&d| d <= degree).collect();
    if d.last() != Some(&degree) && degree < 16 {
        d.push(degree);
    }
    d.into_iter().map(|degree| Family::Poly { degree }).collect()
}

/// Envelope estimators for one domain sharing an E_B J cache.
pub struct Estimator {
    x: Domain,
    field: EbjField,
    cfg: OptimizerConfig,
}

impl Estimator {
    pub fn new(x: &Domain, cfg: &OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            x: x.clone(),
            field: EbjField::new(x, cfg.seed),
            cfg: cfg.clone(),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.x
    }

    pub fn field(&self) -> &EbjField {
        &self.field
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    fn grid(&self) -> CircleGrid {
        CircleGrid::new(self.cfg.nodes).expect("validated")
    }

    fn verify_nodes(&self) -> usize {
        4 * self.cfg.nodes
    }

    fn check(&self, z: &ComplexVector) -> Result<()> {
        z.check_dim(self.x.dim())
    }

    /// E_B J(z).
    pub fn ebj(&self, z: &ComplexVector) -> Result<f64> {
        self.check(z)?;
        Ok(self.field.value(z))
    }

    /// A touching disc about the best inscribed ball for z. Its boundary is
    /// the circle of radius r < d(w, ∂X) about w, so it lies in X by
    /// construction; the node check only guards against rounding.
    fn touching_seed(&self, z: &ComplexVector) -> Option<(ComplexVector, f64, RationalDisc)> {
        let (w, d) = self.field.minimizer(z);
        let mut delta = TOUCH_DELTA;
        while delta < 0.5 {
            let r = d * (1.0 - delta);
            if let Ok(f) = make_touching_disc(z, &w, r) {
                if verify_inside(&f, &self.x, self.verify_nodes()).1 > 0.0 {
                    return Some((w, r, f));
                }
            }
            delta *= 10.0;
        }
        None
    }

    /// E_{A^X} J restricted to discs of the class, without the
    /// connectivity check of [`Estimator::lempert`].
    pub fn restricted_j(&self, z: &ComplexVector, class: &DiscClass) -> Result<EnvelopeEstimate> {
        self.check(z)?;
        let poles = match class.tag {
            ClassTag::OnePole => 1,
            ClassTag::BoundaryInX => class.poles.max(1),
            other => {
                return Err(Error::InvalidFamily(format!(
                    "J is minimized over one_pole or boundary_in_x, not {other:?}"
                )))
            }
        };
        if poles > class.degree {
            return Err(Error::InvalidFamily("pole budget exceeds the degree budget".into()));
        }
        if self.x.contains_unchecked(z) {
            return Ok(EnvelopeEstimate::constant(z));
        }
        let seed = self.touching_seed(z);
        let (w, d) = self.field.minimizer(z);
        let scale = z.dist(&w).max(1e-3);
        let prob = Problem {
            x: &self.x,
            z,
            goal: Goal::Inside {
                mu: self.cfg.penalty,
                margin: self.cfg.margin,
            },
            nodes: self.grid().nodes().to_vec(),
        };
        let seeds = |fam: &Family| match &seed {
            Some((w, r, _)) => {
                let p = touching_params(fam, z, w, *r);
                vec![(p.clone(), Some(p))]
            }
            None => vec![(touching_params(fam, z, &w, d * (1.0 - TOUCH_DELTA)), None)],
        };
        let stream = if poles == 1 { Stream::OnePole } else { Stream::MultiPole };
        let run = staged_search(
            &prob,
            &pole_stages(poles, class.degree),
            seeds,
            scale,
            &self.cfg,
            point_id(z),
            stream as u64,
        );
        Ok(self.finish_restricted(z, run, seed.map(|s| s.2)))
    }

    fn finish_restricted(&self, z: &ComplexVector, mut run: SearchRun, seed: Option<RationalDisc>) -> EnvelopeEstimate {
        run.candidates.sort_by(|a, b| a.objective.total_cmp(&b.objective));
        let mut feasible: Vec<(f64, RationalDisc)> = Vec::new();
        if let Some(f) = seed {
            if let Ok(j) = J(&f) {
                feasible.push((j, f));
            }
        }
        let mut fallback: Option<(f64, RationalDisc)> = None;
        for (k, c) in run.candidates.iter().enumerate().take(EXACT_EVALS) {
            let Ok(f) = c.family.build(z, &c.x) else { continue };
            let Ok(j) = J(&f) else { continue };
            if verify_inside(&f, &self.x, self.verify_nodes()).0 {
                feasible.push((j, f));
            } else {
                if fallback.is_none() {
                    fallback = Some((j, f));
                }
                if k == 0 {
                    if let Some(anchor) = &c.anchor {
                        if let Some((g, _)) = restore(&c.family, z, &self.x, anchor, &c.x, self.verify_nodes()) {
                            if let Ok(j) = J(&g) {
                                feasible.push((j, g));
                            }
                        }
                    }
                }
            }
        }
        let best = feasible.into_iter().min_by(|a, b| a.0.total_cmp(&b.0));
        let (value, disc, ok) = match (best, fallback) {
            (Some((j, f)), _) => (j, f, true),
            (None, Some((j, f))) => (j, f, false),
            (None, None) => (f64::INFINITY, RationalDisc::constant(z), false),
        };
        EnvelopeEstimate {
            value,
            best_disc: disc,
            feasible: ok,
            iterations: run.iterations,
            restarts: run.restarts,
            certified_upper_bound: ok,
            j_part: value,
            poisson_part: 0.0,
        }
    }

    /// Envelope of J over discs with boundary in X; refuses disconnected
    /// domains, where this envelope can exceed V_X.
    pub fn lempert(&self, z: &ComplexVector, class: &DiscClass) -> Result<EnvelopeEstimate> {
        if !self.x.is_connected() {
            return Err(Error::Disconnected);
        }
        self.restricted_j(z, class)
    }

    /// H = J + ∫_{T∖f⁻¹(X)} u∘f dσ for a candidate: arcs located and
    /// integrated by Gauss-Legendre when u is cheap, the trapezoid rule at
    /// 4N nodes otherwise.
    fn exact_value<U>(&self, f: &RationalDisc, u: U, cheap: bool) -> Option<(f64, f64)>
    where
        U: Fn(&ComplexVector) -> f64,
    {
        let j = J(f).ok()?;
        if !j.is_finite() {
            return None;
        }
        let (p, _) = if cheap {
            poisson_integral_refined(u, f, &self.grid(), &self.x).ok()?
        } else {
            let fine = CircleGrid::new(self.verify_nodes()).expect("valid");
            poisson_integral(u, f, &fine, &self.x).ok()?
        };
        Some((j, p))
    }

    fn finish_poisson<U>(&self, z: &ComplexVector, mut run: SearchRun, u: U, cheap: bool) -> EnvelopeEstimate
    where
        U: Fn(&ComplexVector) -> f64,
    {
        run.candidates.sort_by(|a, b| a.objective.total_cmp(&b.objective));
        let mut best: Option<(f64, f64, RationalDisc)> = None;
        let mut seen: Vec<&Candidate> = Vec::new();
        for c in &run.candidates {
            if seen.len() >= EXACT_EVALS {
                break;
            }
            if seen.iter().any(|s| s.family == c.family && s.x == c.x) {
                continue;
            }
            seen.push(c);
            let Ok(f) = c.family.build(z, &c.x) else { continue };
            if let Some((j, p)) = self.exact_value(&f, &u, cheap) {
                if best.as_ref().is_none_or(|b| j + p < b.0 + b.1) {
                    best = Some((j, p, f));
                }
            }
        }
        match best {
            Some((j, p, f)) => EnvelopeEstimate {
                value: j + p,
                best_disc: f,
                feasible: true,
                iterations: run.iterations,
                restarts: run.restarts,
                certified_upper_bound: true,
                j_part: j,
                poisson_part: p,
            },
            None => EnvelopeEstimate {
                value: f64::INFINITY,
                best_disc: RationalDisc::constant(z),
                feasible: false,
                iterations: run.iterations,
                restarts: run.restarts,
                certified_upper_bound: false,
                j_part: f64::INFINITY,
                poisson_part: 0.0,
            },
        }
    }

    fn polynomial_seeds(&self, z: &ComplexVector) -> Vec<ComplexVector> {
        let mut dirs = vec![&self.field.minimizer(z).0 - z];
        for c in self.field.centres() {
            dirs.push(c - z);
        }
        dirs
    }

    fn polynomial_search<F>(&self, z: &ComplexVector, field: &F, stream: Stream) -> SearchRun
    where
        F: Fn(&[Complex64]) -> f64 + Sync,
    {
        let prob = Problem {
            x: &self.x,
            z,
            goal: Goal::Poisson(field),
            nodes: self.grid().nodes().to_vec(),
        };
        let n = z.dim();
        let dirs = self.polynomial_seeds(z);
        let scale = dirs.iter().map(ComplexVector::norm).fold(1e-3, f64::max);
        let seeds = |fam: &Family| {
            let mut out = vec![(vec![0.0; fam.len(n)], None)];
            for d in &dirs {
                let mut p = vec![0.0; fam.len(n)];
                p[..2 * n].copy_from_slice(&d.to_reals());
                out.push((p, None));
            }
            out
        };
        staged_search(
            &prob,
            &poly_stages(self.cfg.degree),
            seeds,
            scale,
            &self.cfg,
            point_id(z),
            stream as u64,
        )
    }

    /// Poisson envelope of E_B J over polynomial discs centred at z.
    pub fn theorem2(&self, z: &ComplexVector) -> Result<EnvelopeEstimate> {
        self.check(z)?;
        if self.x.contains_unchecked(z) {
            return Ok(EnvelopeEstimate::constant(z));
        }
        let fast = |w: &[Complex64]| self.field.fast(w);
        let run = self.polynomial_search(z, &fast, Stream::Polynomial);
        Ok(self.finish_poisson(z, run, |w: &ComplexVector| self.field.value(w), self.field.is_closed_form()))
    }

    /// Envelope of H_r for the inscribed ball of X.
    pub fn hr(&self, z: &ComplexVector) -> Result<EnvelopeEstimate> {
        self.check(z)?;
        if self.x.contains_unchecked(z) {
            return Ok(EnvelopeEstimate::constant(z));
        }
        let (a, _) = self.x.inscribed_ball();
        let r = self.x.signed_distance(&a);
        if !(r > 0.0) {
            return Err(Error::InvalidDomain("no ball found inside X".into()));
        }
        let x = &self.x;
        let u = |w: &[Complex64]| {
            if x.contains_coords(w) {
                0.0
            } else {
                (dist(w, a.coords()) / r).ln().max(0.0)
            }
        };
        let run = self.polynomial_search(z, &u, Stream::Hr);
        Ok(self.finish_poisson(z, run, |w: &ComplexVector| u(w.coords()), true))
    }

    /// H_B = J + ∫ E_B J∘f over one-pole discs, boundary unconstrained.
    fn pole_functional(&self, z: &ComplexVector) -> EnvelopeEstimate {
        let fast = |w: &[Complex64]| self.field.fast(w);
        let prob = Problem {
            x: &self.x,
            z,
            goal: Goal::Poisson(&fast),
            nodes: self.grid().nodes().to_vec(),
        };
        let (w, d) = self.field.minimizer(z);
        let r = self.touching_seed(z).map_or(d * (1.0 - TOUCH_DELTA), |s| s.1);
        let seeds = |fam: &Family| vec![(touching_params(fam, z, &w, r), None)];
        let run = staged_search(
            &prob,
            &pole_stages(1, self.cfg.degree),
            seeds,
            z.dist(&w).max(1e-3),
            &self.cfg,
            point_id(z),
            Stream::PoleFunctional as u64,
        );
        self.finish_poisson(z, run, |w: &ComplexVector| self.field.value(w), self.field.is_closed_form())
    }

    /// Envelope of H_B over all projective discs: the best of the
    /// boundary-in-X searches, the one-pole H_B search and the polynomial
    /// search.
    pub fn theorem1(&self, z: &ComplexVector) -> Result<EnvelopeEstimate> {
        self.check(z)?;
        if self.x.contains_unchecked(z) {
            return Ok(EnvelopeEstimate::constant(z));
        }
        let mut all = vec![
            self.restricted_j(z, &DiscClass::one_pole(self.cfg.degree))?,
            self.pole_functional(z),
            self.theorem2(z)?,
        ];
        if self.cfg.poles > 1 {
            all.push(self.restricted_j(z, &DiscClass::boundary_in_x(self.cfg.degree, self.cfg.poles))?);
        }
        let iterations = all.iter().map(|e| e.iterations).sum();
        let restarts = all.iter().map(|e| e.restarts).sum();
        let mut best = all
            .into_iter()
            .filter(|e| e.feasible)
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .ok_or_else(|| Error::InvalidConfig("no admissible disc found".into()))?;
        best.iterations = iterations;
        best.restarts = restarts;
        Ok(best)
    }
}

/// E_B J(z) = inf_{w∈X} log⁺(‖z-w‖/d(w, ∂X)).
pub fn ebj_ball_inf(x: &Domain, z: &ComplexVector, opt: &OptimizerConfig) -> Result<f64> {
    Estimator::new(x, opt)?.ebj(z)
}

/// Envelope of J over the class at z; X must be flagged connected.
pub fn lempert_envelope(x: &Domain, z: &ComplexVector, class: &DiscClass, opt: &OptimizerConfig) -> Result<EnvelopeEstimate> {
    Estimator::new(x, opt)?.lempert(z, class)
}

/// Envelope of J over discs of the class with f(T) ⊂ X, for any X.
pub fn restricted_j_envelope(
    x: &Domain,
    z: &ComplexVector,
    class: &DiscClass,
    opt: &OptimizerConfig,
) -> Result<EnvelopeEstimate> {
    Estimator::new(x, opt)?.restricted_j(z, class)
}

pub fn theorem1_envelope(x: &Domain, z: &ComplexVector, opt: &OptimizerConfig) -> Result<EnvelopeEstimate> {
    Estimator::new(x, opt)?.theorem1(z)
}

pub fn theorem2_envelope(x: &Domain, z: &ComplexVector, opt: &OptimizerConfig) -> Result<EnvelopeEstimate> {
    Estimator::new(x, opt)?.theorem2(z)
}

pub fn hr_envelope(x: &Domain, z: &ComplexVector, opt: &OptimizerConfig) -> Result<EnvelopeEstimate> {
    Estimator::new(x, opt)?.hr(z)
}
