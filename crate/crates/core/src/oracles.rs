//! Reference values: closed-form extremal functions, exhaustive grid search
//! over small disc families, and sub-mean-value certificates.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::domains::{Domain, DomainKind};
use crate::error::{Error, Result};
use crate::primitives::ComplexVector;
use crate::Complex64;

/// Gap below the oracle tolerated before the direction flag trips.
pub const DIRECTION_TOL: f64 = 1e-9;

/// V of the ball B(a, R): log⁺(‖z - a‖/R).
pub fn v_ball(a: &ComplexVector, r: f64, z: &ComplexVector) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidConfig(format!("radius must be positive, got {r}")));
    }
    z.check_dim(a.dim())?;
    Ok((z.dist(a) / r).ln().max(0.0))
}

/// min over the parts of their ball oracles. An upper bound for V of the
/// union, and the envelope of J over discs with boundary in the union.
pub fn v_union_upper(parts: &[Domain], z: &ComplexVector) -> Result<f64> {
    if parts.is_empty() {
        return Err(Error::NoOracle("empty union".into()));
    }
    let mut best = f64::INFINITY;
    for p in parts {
        match p.kind() {
            DomainKind::Ball { center, radius } => best = best.min(v_ball(center, *radius, z)?),
            DomainKind::Union { parts } => best = best.min(v_union_upper(parts, z)?),
            _ => return Err(Error::NoOracle("union part is not a ball".into())),
        }
    }
    Ok(best)
}

/// Closed-form oracle of a domain when one exists: V for a ball, the
/// min-of-parts upper bound for a union of balls.
pub fn closed_form_oracle(x: &Domain, z: &ComplexVector) -> Result<f64> {
    match x.kind() {
        DomainKind::Ball { center, radius } => v_ball(center, *radius, z),
        DomainKind::Union { parts } => v_union_upper(parts, z),
        _ => Err(Error::NoOracle("only balls and unions of balls have closed forms".into())),
    }
}

/// Signed comparison of an estimate against an oracle value.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct OracleReport {
    pub point: ComplexVector,
    pub oracle: f64,
    pub estimate: f64,
    /// estimate - oracle.
    pub gap: f64,
    /// The estimate fell below the oracle by more than [`DIRECTION_TOL`].
    /// Only meaningful when the oracle is a lower bound for the estimate.
    pub direction_violation: bool,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(point: ComplexVector, oracle: f64, estimate: f64, tol: f64) -> Self {
        let gap = estimate - oracle;
        Self {
            point,
            oracle,
            estimate,
            gap,
            direction_violation: gap < -DIRECTION_TOL,
            pass: (-DIRECTION_TOL..=tol).contains(&gap),
        }
    }
}

/// Exhaustive grid over one-pole discs `f(ζ) = z + ζ g / (ζ - ζ0)` in C^1,
/// with `ζ0 = ρ e^{iφ}` and constant `g = a + ib`.
#[derive(Debug, Clone)]
pub struct BruteForceGrid {
    pub moduli: Vec<f64>,
    pub args: Vec<f64>,
    pub g_re: Vec<f64>,
    pub g_im: Vec<f64>,
    /// Boundary nodes for the membership check.
    pub fine_nodes: usize,
}

/// `count` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count).map(|k| a + (b - a) * k as f64 / (count - 1) as f64).collect(),
    }
}

impl BruteForceGrid {
    /// Moduli `e^{-j}` for j on a grid of step `j_step` in `[0, j_max]`,
    /// `arg_count` arguments, and a square box of g values.
    pub fn one_pole(j_step: f64, j_max: f64, arg_count: usize, g_centre: Complex64, g_half: f64, g_count: usize) -> Self {
        let levels = (j_max / j_step).floor() as usize;
        Self {
            moduli: (1..=levels).map(|k| (-(k as f64) * j_step).exp()).collect(),
            args: (0..arg_count).map(|k| TAU * k as f64 / arg_count as f64).collect(),
            g_re: linspace(g_centre.re - g_half, g_centre.re + g_half, g_count),
            g_im: linspace(g_centre.im - g_half, g_centre.im + g_half, g_count),
            fine_nodes: 4096,
        }
    }

    pub fn len(&self) -> usize {
        self.moduli.len() * self.args.len() * self.g_re.len() * self.g_im.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Minimum of J = -log|ζ0| over the grid discs with f(T) ⊂ X, checked at
/// `fine_nodes` boundary points; 0 for z ∈ X (the constant disc), ∞ when no
/// grid disc qualifies.
pub fn brute_force_envelope(x: &Domain, z: &ComplexVector, grid: &BruteForceGrid) -> Result<f64> {
    if x.dim() != 1 || z.dim() != 1 {
        return Err(Error::InvalidConfig("the one-pole grid lives in C^1".into()));
    }
    if x.contains(z)? {
        return Ok(0.0);
    }
    let z0 = z[0];
    let nodes: Vec<Complex64> = (0..grid.fine_nodes)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / grid.fine_nodes as f64))
        .collect();
    // coarse subset first: most grid discs leave X at one of these
    let coarse: Vec<Complex64> = nodes.iter().step_by((grid.fine_nodes / 64).max(1)).copied().collect();
    let inside = |zeta0: Complex64, g: Complex64, pts: &[Complex64]| {
        pts.iter().all(|&t| {
            x.contains_coords(&[z0 + t * g / (t - zeta0)])
        })
    };
    let mut moduli = grid.moduli.clone();
    // largest modulus first = smallest J first
    moduli.sort_by(|a, b| b.total_cmp(a));
    for rho in moduli {
        if !(rho > 0.0 && rho < 1.0) {
            continue;
        }
        for &phi in &grid.args {
            let zeta0 = Complex64::from_polar(rho, phi);
            for &a in &grid.g_re {
                for &b in &grid.g_im {
                    let g = Complex64::new(a, b);
                    if g.norm() == 0.0 {
                        continue;
                    }
                    if inside(zeta0, g, &coarse) && inside(zeta0, g, &nodes) {
                        return Ok(-rho.ln());
                    }
                }
            }
        }
    }
    Ok(f64::INFINITY)
}

/// `u(c) - ∫ u(c + s e^{iθ} v) dθ/2π` on `nodes` points. A positive value
/// shows that u violates the sub-mean-value inequality on the complex line
/// through c in direction v.
pub fn non_psh_certificate<U>(field: U, c: &ComplexVector, s: f64, direction: &ComplexVector, nodes: usize) -> Result<f64>
where
    U: Fn(&ComplexVector) -> f64,
{
    direction.check_dim(c.dim())?;
    let norm = direction.norm();
    if !(norm > 0.0) || !(s > 0.0) || nodes == 0 {
        return Err(Error::InvalidConfig("need a nonzero direction, positive radius and nodes".into()));
    }
    let v = direction.scale(Complex64::new(1.0 / norm, 0.0));
    let mut total = 0.0;
    for k in 0..nodes {
        let e = Complex64::from_polar(s, TAU * k as f64 / nodes as f64);
        total += field(&(c + &v.scale(e)));
    }
    Ok(field(c) - total / nodes as f64)
}
