//! Families of discs parametrized by the unit circle, and their gluing into
//! a single disc.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{boundary_trace, make_touching_disc, RationalDisc, J};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::primitives::{CircleGrid, ComplexVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A table of discs `F(·, ζ_k)` over the nodes of a circle grid. Values
/// between nodes are defined by trigonometric interpolation of the
/// coefficients.
#[derive(Debug, Clone)]
pub struct DiscFamily {
    grid: CircleGrid,
    members: Vec<RationalDisc>,
}

impl DiscFamily {
    pub fn new(grid: CircleGrid, members: Vec<RationalDisc>) -> Result<Self> {
        if members.len() != grid.len() {
            return Err(Error::InvalidFamily(format!(
                "{} members for a grid of {} nodes",
                members.len(),
                grid.len()
            )));
        }
        let n = members[0].dim();
        if members.iter().any(|m| m.dim() != n) {
            return Err(Error::InvalidFamily("members differ in dimension".into()));
        }
        Ok(Self { grid, members })
    }

    /// Constant family.
    pub fn constant(grid: CircleGrid, disc: RationalDisc) -> Self {
        let members = vec![disc; grid.len()];
        Self { grid, members }
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn members(&self) -> &[RationalDisc] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// (1/N) Σ_k J(F(·, ζ_k)).
    pub fn mean_j(&self) -> Result<f64> {
        let mut total = 0.0;
        for m in &self.members {
            total += J(m)?;
        }
        Ok(total / self.members.len() as f64)
    }
}

/// One piece of a touching family: on the arc starting at angle `start`
/// the member is `f_{h(ζ), w, r}`.
#[derive(Debug, Clone)]
pub struct ArcPiece {
    pub start: f64,
    pub w: ComplexVector,
    pub r: f64,
}

/// C^∞ step from 0 to 1 on [0, 1] with all derivatives vanishing at the ends.
pub fn smoothstep(x: f64) -> f64 {
    fn psi(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = psi(x);
    a / (a + psi(1.0 - x))
}

/// The family `F(·, ζ) = f_{h(ζ), γ(ζ), ϱ(ζ)}` where (γ, ϱ) equals (w_j, r_j)
/// on arc j and moves along a straight segment with a C^∞ profile during the
/// last `transition` radians of each arc. Pieces must be sorted by `start`,
/// with the first starting at 0.
pub fn touching_family(
    h: &RationalDisc,
    grid: CircleGrid,
    pieces: &[ArcPiece],
    transition: f64,
) -> Result<DiscFamily> {
    if pieces.is_empty() {
        return Err(Error::InvalidFamily("no arcs".into()));
    }
    let m = pieces.len();
    for j in 0..m {
        let end = if j + 1 < m { pieces[j + 1].start } else { TAU };
        if !(end - pieces[j].start > transition) || transition <= 0.0 {
            return Err(Error::InvalidFamily(format!(
                "arc {j} is shorter than the transition width"
            )));
        }
    }
    let mut members = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let theta = grid.angle(k);
        let j = pieces.iter().rposition(|p| p.start <= theta).unwrap_or(0);
        let end = if j + 1 < m { pieces[j + 1].start } else { TAU };
        let next = &pieces[(j + 1) % m];
        let s = smoothstep((theta - (end - transition)) / transition);
        let w = &(&pieces[j].w * (1.0 - s)) + &(&next.w * s);
        let r = pieces[j].r * (1.0 - s) + next.r * s;
        let z = h
            .eval_affine(grid.nodes()[k])
            .ok_or_else(|| Error::InvalidFamily("h meets the hyperplane at infinity".into()))?;
        members.push(make_touching_disc(&z, &w, r)?);
    }
    DiscFamily::new(grid, members)
}

/// Two-arc instance: `w_1` on the upper half of the circle, `w_2` on the
/// lower half, common radius `r`, transitions of width π/2.
pub fn two_arc_family(
    h: &RationalDisc,
    w1: ComplexVector,
    w2: ComplexVector,
    r: f64,
    nodes: usize,
) -> Result<DiscFamily> {
    let grid = CircleGrid::new(nodes)?;
    touching_family(
        h,
        grid,
        &[
            ArcPiece { start: 0.0, w: w1, r },
            ArcPiece {
                start: std::f64::consts::PI,
                w: w2,
                r,
            },
        ],
        std::f64::consts::FRAC_PI_2,
    )
}

#[derive(Debug, Clone)]
pub struct GlueParams {
    /// Target l1 norm of the discarded Fourier modes.
    pub fourier_tol: f64,
    pub k_max: usize,
    pub theta_candidates: usize,
    /// Radii and angles per factor of the bidisc check grid.
    pub check_radii: usize,
    pub check_angles: usize,
    pub degree_budget: usize,
    /// Nodes for the final boundary check.
    pub verify_nodes: usize,
}

impl Default for GlueParams {
    fn default() -> Self {
        Self {
            fourier_tol: 1e-6,
            k_max: 4096,
            theta_candidates: 256,
            check_radii: 8,
            check_angles: 8,
            degree_budget: 512,
            verify_nodes: 1024,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlueOutcome {
    pub disc: RationalDisc,
    /// Fourier truncation order.
    pub j: usize,
    /// Twist exponent.
    pub k: usize,
    pub theta0: f64,
    pub fourier_tail: f64,
    /// l1 norm of coefficients dropped to meet the degree budget.
    pub truncation_residual: f64,
    /// (1/N) Σ J over the family.
    pub family_mean_j: f64,
    pub j_value: f64,
}

/// Glue a family of discs with boundaries in `x` and centres on `h` into one
/// disc `g` with `g(0) = h(0)`, `g(T) ⊂ X` and `J(g)` close to the family
/// average of `J`.
pub fn glue_family(
    h: &RationalDisc,
    family: &DiscFamily,
    x: &Domain,
    params: &GlueParams,
) -> Result<GlueOutcome> {
    let n = family.dim();
    if h.dim() != n || x.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.dim(),
        });
    }
    let grid = family.grid();
    let big_n = grid.len();
    let h0 = &h.components()[0];
    if h0.degree().is_none() || h0.roots().iter().any(|r| r.norm() <= 1.0) {
        return Err(Error::InvalidFamily("h must map the closed disc into C^n".into()));
    }

    // lifted coefficients c_m(ζ_k) ∈ C^{n+1}, m ≥ 1
    let check = CircleGrid::new(64)?;
    let mut lifted: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(big_n);
    let mut deg = 0usize;
    for (k, f) in family.members().iter().enumerate() {
        let hz = h
            .eval_affine(grid.nodes()[k])
            .ok_or_else(|| Error::InvalidFamily("h meets the hyperplane at infinity".into()))?;
        let scale = f.components()[0].coeff(0);
        if scale == ZERO {
            return Err(Error::InvalidFamily(format!("member {k} is centred at infinity")));
        }
        let centre: Vec<Complex64> = f.components()[1..].iter().map(|p| p.coeff(0) / scale).collect();
        let off = centre
            .iter()
            .zip(hz.coords())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if off > 1e-9 * (1.0 + hz.norm()) {
            return Err(Error::InvalidFamily(format!("member {k} is not centred at h(ζ_{k})")));
        }
        match boundary_trace(f, &check).affine_points() {
            Some(pts) if pts.iter().all(|p| x.contains_unchecked(p)) => {}
            _ => return Err(Error::InvalidFamily(format!("member {k} leaves X on the boundary"))),
        }
        let inv = 1.0 / scale;
        let comps: Vec<Vec<Complex64>> = f
            .components()
            .iter()
            .map(|p| p.coeffs().iter().map(|c| c * inv).collect())
            .collect();
        deg = deg.max(comps.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1));
        lifted.push(comps);
    }
    if deg == 0 {
        // every member is constant, so g = h
        let disc = h.clone();
        let j_value = J(&disc)?;
        return Ok(GlueOutcome {
            disc,
            j: 0,
            k: 0,
            theta0: 0.0,
            fourier_tail: 0.0,
            truncation_residual: 0.0,
            family_mean_j: family.mean_j()?,
            j_value,
        });
    }

    // Fourier coefficients over ζ: fc[m][i][q], q indexed as in the FFT output
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(big_n);
    let mut fc = vec![vec![vec![ZERO; big_n]; n + 1]; deg + 1];
    for (m, fm) in fc.iter_mut().enumerate().skip(1) {
        for (i, fmi) in fm.iter_mut().enumerate() {
            for (k, slot) in fmi.iter_mut().enumerate() {
                *slot = lifted[k][i].get(m).copied().unwrap_or(ZERO);
            }
            fft.process(fmi);
            let inv = 1.0 / big_n as f64;
            fmi.iter_mut().for_each(|c| *c *= inv);
        }
    }
    let q_index = |q: i64| -> usize {
        if q >= 0 {
            q as usize
        } else {
            (big_n as i64 + q) as usize
        }
    };
    let tail_beyond = |j: usize| -> f64 {
        let mut t = 0.0;
        for fm in fc.iter().skip(1) {
            for fmi in fm {
                for (idx, c) in fmi.iter().enumerate() {
                    let q = if idx <= big_n / 2 { idx as i64 } else { idx as i64 - big_n as i64 };
                    if q.unsigned_abs() as usize > j {
                        t += c.norm();
                    }
                }
            }
        }
        t
    };
    let j_max = big_n / 2 - 1;
    let mut j = 1usize;
    let mut tail = tail_beyond(j);
    while tail >= params.fourier_tol && j < j_max {
        j = (2 * j).min(j_max);
        tail = tail_beyond(j);
    }

    // Q_m(ζ) = Σ_{|q|≤j} ĉ_{m,q} ζ^{q+j} (so ζ^{mK} P_m = ζ^{mK-j} Q_m)
    let q_polys: Vec<Vec<Polynomial>> = (0..=deg)
        .map(|m| {
            (0..=n)
                .map(|i| {
                    if m == 0 {
                        return Polynomial::zero();
                    }
                    Polynomial::new(
                        (-(j as i64)..=j as i64)
                            .map(|q| fc[m][i][q_index(q)])
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();

    let h_lift = |zeta: Complex64| -> Vec<Complex64> {
        let raw = h.eval_raw(zeta);
        let inv = 1.0 / raw[0];
        raw.iter().map(|c| c * inv).collect()
    };

    // smallest K ≥ j (by doubling) for which G̃ stays away from 0 on the bidisc grid
    let mut k_twist = j.max(1);
    loop {
        if bidisc_ok(&q_polys, &h_lift, j, k_twist, params) {
            break;
        }
        if k_twist >= params.k_max {
            return Err(Error::GluingFailure(format!(
                "no twist exponent up to {} keeps the glued map away from 0",
                params.k_max
            )));
        }
        k_twist = (2 * k_twist).min(params.k_max);
    }

    // g̃_θ = h̃ + Σ_m e^{imθ} ζ^{m(K+1)-j} Q_m
    let shifted: Vec<Vec<Polynomial>> = q_polys
        .iter()
        .enumerate()
        .map(|(m, qs)| {
            qs.iter()
                .map(|q| if m == 0 { Polynomial::zero() } else { q.shift(m * (k_twist + 1) - j) })
                .collect()
        })
        .collect();
    let out_deg = deg * (k_twist + 1) + j + h.degree();
    let quad = CircleGrid::new((4 * out_deg).next_power_of_two().max(256))?;
    let a_vals: Vec<Vec<Complex64>> = shifted
        .iter()
        .map(|qs| quad.nodes().iter().map(|&z| qs[0].eval(z)).collect())
        .collect();
    let h0_vals: Vec<Complex64> = quad.nodes().iter().map(|&z| h_lift(z)[0]).collect();
    let mut best = (f64::INFINITY, 0.0);
    for c in 0..params.theta_candidates {
        let theta = TAU * c as f64 / params.theta_candidates as f64;
        let rot: Vec<Complex64> = (0..=deg).map(|m| Complex64::from_polar(1.0, m as f64 * theta)).collect();
        let mean = quad
            .nodes()
            .iter()
            .enumerate()
            .map(|(t, _)| {
                let v = h0_vals[t] + (1..=deg).map(|m| rot[m] * a_vals[m][t]).sum::<Complex64>();
                v.norm().ln()
            })
            .sum::<f64>()
            / quad.len() as f64;
        if mean < best.0 {
            best = (mean, theta);
        }
    }
    let theta0 = best.1;

    // assemble polynomial components: p^h_0 · g̃
    let mut comps = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut sum = Polynomial::zero();
        for (m, qs) in shifted.iter().enumerate().skip(1) {
            sum = sum.add(&qs[i].scale(Complex64::from_polar(1.0, m as f64 * theta0)));
        }
        comps.push(h.components()[i].add(&h0.mul(&sum)));
    }
    let mut truncation_residual = 0.0;
    for p in comps.iter_mut() {
        truncation_residual += p.truncate(params.degree_budget);
    }
    // exact centre: the twisted terms have no constant coefficient
    for (i, p) in comps.iter_mut().enumerate() {
        p.coeffs_mut()[0] = h.components()[i].coeff(0);
    }
    let disc = RationalDisc::new(comps)?;

    let verify = CircleGrid::new(params.verify_nodes)?;
    let trace = boundary_trace(&disc, &verify);
    let Some(pts) = trace.affine_points() else {
        return Err(Error::GluingFailure("glued disc meets infinity on the circle".into()));
    };
    if let Some((k, p)) = pts.iter().enumerate().find(|(_, p)| !x.contains_unchecked(p)) {
        return Err(Error::GluingFailure(format!(
            "boundary point at node {k} ({:?}) is outside X",
            p.coords()
        )));
    }
    let j_value = J(&disc)?;
    Ok(GlueOutcome {
        disc,
        j,
        k: k_twist,
        theta0,
        fourier_tail: tail,
        truncation_residual,
        family_mean_j: family.mean_j()?,
        j_value,
    })
}

fn bidisc_ok(
    q_polys: &[Vec<Polynomial>],
    h_lift: &impl Fn(Complex64) -> Vec<Complex64>,
    j: usize,
    k: usize,
    params: &GlueParams,
) -> bool {
    let deg = q_polys.len() - 1;
    let pts = |count_r: usize, count_a: usize| -> Vec<Complex64> {
        let mut v = vec![ZERO];
        for a in 1..=count_r {
            let rad = a as f64 / count_r as f64;
            for b in 0..count_a {
                v.push(Complex64::from_polar(rad, TAU * (b as f64 + 0.5 * (a % 2) as f64) / count_a as f64));
            }
        }
        v
    };
    let xis = pts(params.check_radii, params.check_angles);
    let zetas = pts(params.check_radii, params.check_angles);
    for &zeta in &zetas {
        let hz = h_lift(zeta);
        let scale = hz.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let terms: Vec<Vec<Complex64>> = (1..=deg)
            .map(|m| {
                let pow = zeta.powu((m * k - j) as u32);
                q_polys[m].iter().map(|q| q.eval(zeta) * pow).collect()
            })
            .collect();
        for &xi in &xis {
            let mut big = 0.0f64;
            for i in 0..hz.len() {
                let mut v = hz[i];
                let mut xp = Complex64::new(1.0, 0.0);
                for t in &terms {
                    xp *= xi;
                    v += xp * t[i];
                }
                big = big.max(v.norm());
            }
            if big <= 1e-8 * scale.max(1.0) {
                return false;
            }
        }
    }
    true
}
