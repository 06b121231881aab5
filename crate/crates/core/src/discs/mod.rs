//! Rational analytic discs `ζ ↦ [p_0(ζ) : ... : p_n(ζ)]` in P^n.

mod family;

pub use family::{
    glue_family, smoothstep, touching_family, two_arc_family, ArcPiece, DiscFamily, GlueOutcome, GlueParams,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::primitives::{affine_part, proj_normalize, CircleGrid, ComplexVector, ProjectivePoint};

/// Roots closer than this (relative) are always merged.
pub const TAU_CLUSTER: f64 = 1e-8;
/// Zeros of p_0 with ||ζ| - 1| within this band are rejected.
pub const TAU_BOUNDARY: f64 = 1e-6;
/// Relative tolerance for "this Taylor coefficient vanishes".
pub(crate) const ORDER_TOL: f64 = 1e-11;
/// Candidate clusters for multiple roots are formed within this radius and
/// kept only if the centroid is a numerical root of matching order.
const CLUSTER_PROBE: f64 = 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Zeros of the 0-th component in the open unit disc.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZeroSet {
    pub entries: Vec<(Complex64, usize)>,
    /// p_0 ≡ 0: the whole disc lies in H_∞.
    pub degenerate: bool,
}

impl ZeroSet {
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// Zeros of `p` inside the unit disc, clustered into multiplicities.
pub fn zeros_in_disc(p: &Polynomial) -> Result<ZeroSet> {
    if p.degree().is_none() {
        return Ok(ZeroSet {
            entries: Vec::new(),
            degenerate: true,
        });
    }
    let roots = p.roots();
    for r in &roots {
        let m = r.norm();
        if (m - 1.0).abs() <= TAU_BOUNDARY {
            return Err(Error::BoundaryZero { modulus: m });
        }
    }
    let inside: Vec<Complex64> = roots.iter().copied().filter(|r| r.norm() < 1.0).collect();
    let mut entries = cluster_roots(p, &inside);
    refine_cluster_moduli(p, &mut entries, &roots);
    Ok(ZeroSet {
        entries,
        degenerate: false,
    })
}

fn single_linkage(points: &[Complex64], radius: impl Fn(Complex64) -> f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius(points[i]).max(radius(points[j])) {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

fn centroid(points: &[Complex64], idx: &[usize]) -> Complex64 {
    idx.iter().map(|&i| points[i]).sum::<Complex64>() / idx.len() as f64
}

fn cluster_roots(p: &Polynomial, roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut out = Vec::new();
    for group in single_linkage(roots, |r| CLUSTER_PROBE * r.norm().max(1.0)) {
        let m = group.len();
        let c = centroid(roots, &group);
        if m == 1 || p.order_at(c, ORDER_TOL) >= m {
            out.push((if m == 1 { roots[group[0]] } else { c }, m));
            continue;
        }
        let sub: Vec<Complex64> = group.iter().map(|&i| roots[i]).collect();
        for g in single_linkage(&sub, |r| TAU_CLUSTER * r.norm().max(1.0)) {
            out.push((centroid(&sub, &g), g.len()));
        }
    }
    out
}

/// Roots packed within this (relative) distance have their log-moduli
/// corrected as a group.
const CLUSTER_REFINE: f64 = 5e-2;

/// Close or multiple roots are ill-conditioned one by one, while the sum of
/// their log-moduli is not. Rescale each group of nearby entries so that
/// sum matches a contour integral.
fn refine_cluster_moduli(p: &Polynomial, entries: &mut [(Complex64, usize)], all: &[Complex64]) {
    let centres: Vec<Complex64> = entries.iter().map(|e| e.0).collect();
    for group in single_linkage(&centres, |r| CLUSTER_REFINE * r.norm().max(1.0)) {
        if group.iter().map(|&i| entries[i].1).sum::<usize>() < 2 {
            continue;
        }
        let mut members = Vec::new();
        for &i in &group {
            members.extend(std::iter::repeat_n(entries[i].0, entries[i].1));
        }
        let near = |r: &Complex64| group.iter().any(|&i| (r - entries[i].0).norm() <= CLUSTER_PROBE);
        let others: Vec<Complex64> = all.iter().copied().filter(|r| !near(r)).collect();
        let Some(target) = cluster_log_modulus(p, &members, &others) else {
            continue;
        };
        let raw: f64 = members.iter().map(|r| r.norm().ln()).sum();
        let shift = (target - raw) / members.len() as f64;
        if shift.abs() < 1e-6 {
            for &i in &group {
                entries[i].0 *= shift.exp();
            }
        }
    }
}

/// Σ log|r| over the roots of `p` near `members`, from the contour integral
/// of log(ζ/c) p'/p on a circle about their centroid c that keeps the other
/// roots and the origin well outside.
fn cluster_log_modulus(p: &Polynomial, members: &[Complex64], others: &[Complex64]) -> Option<f64> {
    const NODES: usize = 256;
    let c = members.iter().sum::<Complex64>() / members.len() as f64;
    let spread = members.iter().map(|r| (r - c).norm()).fold(0.0, f64::max);
    let gap = others.iter().map(|r| (r - c).norm()).fold(f64::INFINITY, f64::min);
    let radius = (0.5 * gap).min(0.5 * c.norm());
    if !(radius >= 8.0 * spread) || radius == 0.0 {
        return None;
    }
    let dp = p.derivative();
    let mut total = ZERO;
    for k in 0..NODES {
        let e = Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / NODES as f64);
        let z = c + e;
        total += (z / c).ln() * dp.eval(z) / p.eval(z) * e;
    }
    let sum = total.re / NODES as f64;
    sum.is_finite().then(|| members.len() as f64 * c.norm().ln() + sum)
}

/// An analytic disc in P^n given by n+1 polynomial components without a
/// common zero on the closed unit disc.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalDisc {
    components: Vec<Polynomial>,
    radius_of_validity: f64,
}

impl RationalDisc {
    /// Validate components; common zeros in the closed unit disc are
    /// removable singularities and are divided out.
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::DegenerateDisc(
                "a disc in P^n needs at least two components".into(),
            ));
        }
        if components.iter().all(Polynomial::is_zero) {
            return Err(Error::DegenerateDisc("all components vanish identically".into()));
        }
        if components
            .iter()
            .flat_map(|p| p.coeffs())
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let mut components = components;
        let mut radius = f64::INFINITY;
        if !components[0].is_zero() && components[0].degree().unwrap_or(0) > 0 {
            for r in components[0].roots() {
                let common = components
                    .iter()
                    .all(|q| q.order_at(r, ORDER_TOL) >= 1);
                if !common {
                    continue;
                }
                if r.norm() <= 1.0 + TAU_BOUNDARY {
                    for q in components.iter_mut() {
                        if !q.is_zero() {
                            *q = q.deflate(r).0;
                        }
                    }
                } else {
                    radius = radius.min(r.norm());
                }
            }
        }
        Ok(Self {
            components,
            radius_of_validity: radius,
        })
    }

    pub(crate) fn from_parts_unchecked(components: Vec<Polynomial>) -> Self {
        Self {
            components,
            radius_of_validity: f64::INFINITY,
        }
    }

    /// Constant disc at an affine point.
    pub fn constant(z: &ComplexVector) -> Self {
        let mut comps = vec![Polynomial::constant(ONE)];
        comps.extend(z.coords().iter().map(|&c| Polynomial::constant(c)));
        Self::from_parts_unchecked(comps)
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.components
            .iter()
            .filter_map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn radius_of_validity(&self) -> f64 {
        self.radius_of_validity
    }

    /// True when p_0 has no zero on the closed unit disc, i.e. the disc maps into C^n.
    pub fn is_affine(&self) -> bool {
        let p0 = &self.components[0];
        match p0.degree() {
            None => false,
            Some(0) => true,
            Some(_) => p0.roots().iter().all(|r| r.norm() > 1.0),
        }
    }

    /// Homogeneous coordinates before normalization.
    pub fn eval_raw(&self, zeta: Complex64) -> Vec<Complex64> {
        self.components.iter().map(|p| p.eval(zeta)).collect()
    }

    pub fn eval(&self, zeta: Complex64) -> Result<ProjectivePoint> {
        proj_normalize(&self.eval_raw(zeta))
    }

    /// Affine value at ζ, `None` at (or numerically at) H_∞.
    pub fn eval_affine(&self, zeta: Complex64) -> Option<ComplexVector> {
        let raw = self.eval_raw(zeta);
        affine_from_raw(&raw)
    }

    pub fn centre(&self) -> Result<ComplexVector> {
        affine_part(&self.eval(ZERO)?).map_err(|_| Error::CentreAtInfinity)
    }

    /// Precompose with a rotation ζ ↦ e^{iθ} ζ.
    pub fn rotate(&self, theta: f64) -> Self {
        let l = Complex64::from_polar(1.0, theta);
        Self {
            components: self.components.iter().map(|p| p.compose_scale(l)).collect(),
            radius_of_validity: self.radius_of_validity,
        }
    }

    /// Precompose with ζ ↦ ζ^k.
    pub fn power(&self, k: usize) -> Self {
        Self {
            components: self.components.iter().map(|p| p.compose_power(k)).collect(),
            radius_of_validity: self.radius_of_validity.powf(1.0 / k as f64),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&DiscSpec::from(self)).expect("disc serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DiscSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(spec.components)
    }
}

/// `{"components": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscSpec {
    pub components: Vec<Polynomial>,
}

impl From<&RationalDisc> for DiscSpec {
    fn from(d: &RationalDisc) -> Self {
        Self {
            components: d.components.clone(),
        }
    }
}

/// Relative size of |z_0| below which a point counts as being at H_∞.
pub const NEAR_INFINITY: f64 = 1e-12;

pub(crate) fn affine_from_raw(raw: &[Complex64]) -> Option<ComplexVector> {
    let z0 = raw[0];
    let big = raw.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if big == 0.0 || z0.norm() <= NEAR_INFINITY * big {
        return None;
    }
    let inv = 1.0 / z0;
    ComplexVector::new(raw[1..].iter().map(|c| c * inv).collect()).ok()
}

/// J(f) = -Σ m log|ζ| over the zeros of f_0 in the disc, after removing
/// common factors of the components; ∞ when f_0 ≡ 0.
#[allow(non_snake_case)]
pub fn J(f: &RationalDisc) -> Result<f64> {
    let p0 = &f.components[0];
    let zs = zeros_in_disc(p0)?;
    if zs.degenerate {
        return Ok(f64::INFINITY);
    }
    let mut total = 0.0;
    for (c, m) in zs.entries {
        let common = f.components[1..]
            .iter()
            .map(|q| q.order_at(c, ORDER_TOL))
            .min()
            .unwrap_or(0)
            .min(m);
        let m_eff = m - common;
        if m_eff == 0 {
            continue;
        }
        if c == ZERO {
            return Ok(f64::INFINITY);
        }
        total -= m_eff as f64 * c.norm().ln();
    }
    Ok(total.max(0.0))
}

/// The disc f_{z,w,r}: centre z, boundary on the circle of radius r about w
/// in the complex line through z and w, one simple pole at ζ = -r/‖z-w‖.
pub fn make_touching_disc(z: &ComplexVector, w: &ComplexVector, r: f64) -> Result<RationalDisc> {
    w.check_dim(z.dim())?;
    let l = z.dist(w);
    if l == 0.0 {
        return Err(Error::DegenerateDisc("touching disc needs z ≠ w".into()));
    }
    if !(r > 0.0) {
        return Err(Error::DegenerateDisc(format!("radius must be positive, got {r}")));
    }
    if r >= l {
        return Err(Error::PoleOutsideDisc { pole_modulus: r / l });
    }
    let mut comps = vec![Polynomial::new(vec![Complex64::new(r, 0.0), Complex64::new(l, 0.0)])];
    let k = r / l;
    for i in 0..z.dim() {
        let d = z[i] - w[i];
        comps.push(Polynomial::new(vec![
            w[i] * r + d * (l * k),
            w[i] * l + d * (r * k),
        ]));
    }
    Ok(RationalDisc::from_parts_unchecked(comps))
}

/// Result of [`make_one_pole_disc`]. When `g(ζ0) = 0` the pole is removable;
/// the factor (ζ - ζ0) is divided out and `removable_pole` is set.
#[derive(Debug, Clone)]
pub struct OnePoleDisc {
    pub disc: RationalDisc,
    pub removable_pole: bool,
}

/// `p_0 = ζ - ζ0`, `p_i = (ζ - ζ0) z_i + ζ g_i(ζ)`: centre z, at most one
/// simple pole at ζ0, J = -log|ζ0| when the pole is genuine.
pub fn make_one_pole_disc(z: &ComplexVector, zeta0: Complex64, g: &[Polynomial]) -> Result<OnePoleDisc> {
    if g.len() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            got: g.len(),
        });
    }
    let m = zeta0.norm();
    if !(m > 0.0) {
        return Err(Error::CentreAtInfinity);
    }
    if m >= 1.0 {
        return Err(Error::PoleOutsideDisc { pole_modulus: m });
    }
    if g.iter().all(Polynomial::is_zero) {
        return Err(Error::DegenerateDisc(
            "g ≡ 0 gives the constant disc with a removable singularity".into(),
        ));
    }
    let lin = Polynomial::linear_root(zeta0);
    let mut comps = vec![lin.clone()];
    for (i, gi) in g.iter().enumerate() {
        comps.push(lin.scale(z[i]).add(&gi.shift(1)));
    }
    let gnorm: f64 = g.iter().map(Polynomial::l1_norm).sum();
    let removable = g.iter().all(|gi| gi.eval(zeta0).norm() <= 1e-12 * gnorm.max(1.0));
    if removable {
        let comps = comps.iter().map(|p| p.deflate(zeta0).0).collect();
        return Ok(OnePoleDisc {
            disc: RationalDisc::from_parts_unchecked(comps),
            removable_pole: true,
        });
    }
    Ok(OnePoleDisc {
        disc: RationalDisc::from_parts_unchecked(comps),
        removable_pole: false,
    })
}

/// `p_0 ≡ 1`, `p_i = z_i + Σ_k c_{k,i} ζ^k` (coefficient vectors for k = 1..d).
pub fn make_polynomial_disc(z: &ComplexVector, c: &[ComplexVector]) -> Result<RationalDisc> {
    for ck in c {
        ck.check_dim(z.dim())?;
    }
    let mut comps = vec![Polynomial::constant(ONE)];
    for i in 0..z.dim() {
        let mut coeffs = vec![z[i]];
        coeffs.extend(c.iter().map(|ck| ck[i]));
        comps.push(Polynomial::new(coeffs));
    }
    Ok(RationalDisc::from_parts_unchecked(comps))
}

/// Replace every multiple intersection with H_∞ by simple ones of the same
/// modulus. A zero `a` of multiplicity m becomes `a e^{iδ_j}`, j = 1..m, with
/// the δ_j equally spaced in [-δ', δ'], δ' ≤ δ, summing to zero; so J and the
/// centre are unchanged. δ' is halved until the boundary values move by at
/// most δ on a 256-node grid.
pub fn simplify_multiplicities(f: &RationalDisc, delta: f64) -> Result<RationalDisc> {
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!("δ must be positive, got {delta}")));
    }
    let p0 = &f.components[0];
    let zs = zeros_in_disc(p0)?;
    if zs.degenerate {
        return Err(Error::DegenerateDisc("f_0 ≡ 0".into()));
    }
    if p0.eval(ZERO) == ZERO || zs.entries.iter().any(|(c, _)| *c == ZERO) {
        return Err(Error::CentreAtInfinity);
    }
    if zs.entries.iter().all(|e| e.1 == 1) {
        return Ok(f.clone());
    }
    let grid = CircleGrid::new(256)?;
    let reference: Vec<Option<ComplexVector>> =
        grid.nodes().iter().map(|&z| f.eval_affine(z)).collect();
    let mut spread = delta;
    for _ in 0..60 {
        let g = split_zeros(f, &zs, spread);
        let moved = grid
            .nodes()
            .iter()
            .zip(&reference)
            .map(|(&z, r)| match (g.eval_affine(z), r) {
                (Some(a), Some(b)) => a.dist(b),
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max);
        if moved <= delta {
            return Ok(g);
        }
        spread *= 0.5;
    }
    Err(Error::DegenerateDisc(
        "could not split multiple zeros within the requested distance".into(),
    ))
}

fn split_zeros(f: &RationalDisc, zs: &ZeroSet, spread: f64) -> RationalDisc {
    let p0 = &f.components[0];
    let mut q = p0.clone();
    let mut new_roots = Vec::new();
    for &(a, m) in &zs.entries {
        if m == 1 {
            continue;
        }
        for _ in 0..m {
            q = q.deflate(a).0;
        }
        for j in 0..m {
            let t = -1.0 + 2.0 * j as f64 / (m - 1) as f64;
            new_roots.push(a * Complex64::from_polar(1.0, spread * t));
        }
    }
    let mut g0 = q.mul(&Polynomial::from_roots(&new_roots));
    // pin the constant term so that g(0) = f(0) bit for bit
    let target = p0.coeff(0);
    let got = g0.coeff(0);
    if got != ZERO {
        g0 = g0.scale(target / got);
    }
    g0.coeffs_mut()[0] = target;
    g0.coeffs_mut().truncate(p0.coeffs().len());
    let mut comps = f.components.clone();
    comps[0] = g0;
    RationalDisc::from_parts_unchecked(comps)
}

/// Values of a disc on a circle grid.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub points: Vec<Option<ProjectivePoint>>,
    /// Nodes mapped to (or numerically onto) H_∞.
    pub near_infinity: Vec<bool>,
}

impl BoundaryTrace {
    pub fn any_near_infinity(&self) -> bool {
        self.near_infinity.iter().any(|&b| b)
    }

    /// Affine points, or `None` if some node is at H_∞.
    pub fn affine_points(&self) -> Option<Vec<ComplexVector>> {
        self.points
            .iter()
            .zip(&self.near_infinity)
            .map(|(p, &inf)| if inf { None } else { p.as_ref().and_then(|p| affine_part(p).ok()) })
            .collect()
    }
}

pub fn boundary_trace(f: &RationalDisc, grid: &CircleGrid) -> BoundaryTrace {
    let mut points = Vec::with_capacity(grid.len());
    let mut near = Vec::with_capacity(grid.len());
    for &z in grid.nodes() {
        let raw = f.eval_raw(z);
        let p = proj_normalize(&raw).ok();
        let inf = match &p {
            None => true,
            Some(p) => p.infinity_proximity() <= NEAR_INFINITY,
        };
        points.push(p);
        near.push(inf);
    }
    BoundaryTrace {
        points,
        near_infinity: near,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn v(xs: &[(f64, f64)]) -> ComplexVector {
        ComplexVector::new(xs.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
    }

    #[test]
    fn linear_zero() {
        let zs = zeros_in_disc(&Polynomial::linear_root(c(0.5, 0.0))).unwrap();
        assert_eq!(zs.entries.len(), 1);
        assert!((zs.entries[0].0 - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(zs.entries[0].1, 1);
    }

    #[test]
    fn double_zero_inside_and_far_zero_ignored() {
        let p = Polynomial::from_roots(&[c(0.3, 0.0), c(0.3, 0.0), c(5.0, 0.0)]);
        let zs = zeros_in_disc(&p).unwrap();
        assert_eq!(zs.entries.len(), 1);
        let (loc, m) = zs.entries[0];
        assert_eq!(m, 2);
        // independent check: Newton on p' converges to the double root
        let dp = p.derivative();
        let ddp = dp.derivative();
        let mut x = c(0.25, 0.0);
        for _ in 0..50 {
            x -= dp.eval(x) / ddp.eval(x);
        }
        assert!((loc - x).norm() < 1e-10, "{loc} vs {x}");
        assert!(p.eval(x).norm() < 1e-15);
    }

    #[test]
    fn degenerate_and_boundary() {
        assert!(zeros_in_disc(&Polynomial::zero()).unwrap().degenerate);
        let on_circle = Polynomial::linear_root(c(0.0, 1.0));
        assert!(matches!(zeros_in_disc(&on_circle), Err(Error::BoundaryZero { .. })));
        let near = Polynomial::linear_root(c(1.0 - 1e-7, 0.0));
        assert!(matches!(zeros_in_disc(&near), Err(Error::BoundaryZero { .. })));
    }

    #[test]
    fn touching_disc_properties() {
        let z = v(&[(2.0, 0.0), (0.0, 0.0)]);
        let w = ComplexVector::zeros(2);
        let f = make_touching_disc(&z, &w, 1.0).unwrap();
        assert_eq!(f.centre().unwrap(), z);
        let zs = zeros_in_disc(&f.components()[0]).unwrap();
        assert_eq!(zs.entries.len(), 1);
        assert!((zs.entries[0].0 - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((J(&f).unwrap() - 2f64.ln()).abs() < 1e-15);
        let at_one = f.eval_affine(c(1.0, 0.0)).unwrap();
        assert!(at_one.dist(&v(&[(1.0, 0.0), (0.0, 0.0)])) < 1e-15);
        let grid = CircleGrid::new(64).unwrap();
        for p in boundary_trace(&f, &grid).affine_points().unwrap() {
            assert!((p.dist(&w) - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            make_touching_disc(&z, &w, 2.0),
            Err(Error::PoleOutsideDisc { .. })
        ));
    }

    #[test]
    fn touching_disc_general_position() {
        let z = v(&[(1.0, 2.0), (-0.5, 0.3)]);
        let w = v(&[(0.1, -0.2), (0.4, 0.0)]);
        let r = 0.7;
        let f = make_touching_disc(&z, &w, r).unwrap();
        assert!(f.centre().unwrap().dist(&z) < 1e-14);
        let grid = CircleGrid::new(64).unwrap();
        for p in boundary_trace(&f, &grid).affine_points().unwrap() {
            assert!((p.dist(&w) - r).abs() < 1e-12);
        }
        assert!((J(&f).unwrap() - (z.dist(&w) / r).ln()).abs() < 1e-13);
    }

    #[test]
    fn one_pole_matches_touching_disc() {
        // n = 1, z = 2, ζ0 = -1/2: g = (ζ0² - 1)(z - w) with w = 0 reproduces f_{2,0,1}
        let z = v(&[(2.0, 0.0)]);
        let zeta0 = c(-0.5, 0.0);
        let g = Polynomial::constant((zeta0 * zeta0 - 1.0) * 2.0);
        let f = make_one_pole_disc(&z, zeta0, &[g]).unwrap();
        assert!(!f.removable_pole);
        assert!((J(&f.disc).unwrap() - 2f64.ln()).abs() < 1e-15);
        let t = make_touching_disc(&z, &ComplexVector::zeros(1), 1.0).unwrap();
        for k in 0..16 {
            let zeta = Complex64::from_polar(1.0, k as f64 * 0.39);
            let a = f.disc.eval_affine(zeta).unwrap();
            let b = t.eval_affine(zeta).unwrap();
            assert!(a.dist(&b) < 1e-13);
        }
    }

    #[test]
    fn one_pole_edge_cases() {
        let z = v(&[(2.0, 0.0)]);
        assert!(make_one_pole_disc(&z, c(-0.5, 0.0), &[Polynomial::zero()]).is_err());
        // g(ζ0) = 0: g = ζ - ζ0
        let zeta0 = c(0.3, 0.2);
        let out = make_one_pole_disc(&z, zeta0, &[Polynomial::linear_root(zeta0)]).unwrap();
        assert!(out.removable_pole);
        assert_eq!(J(&out.disc).unwrap(), 0.0);
        for m in [0.9, 0.99, 0.999_999] {
            let f = make_one_pole_disc(&z, c(m, 0.0), &[Polynomial::constant(c(1.0, 0.0))]).unwrap();
            assert!((J(&f.disc).unwrap() + m.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_discs_have_no_poles() {
        let z = v(&[(0.0, 0.0)]);
        let f = make_polynomial_disc(&z, &[v(&[(1.0, 0.0)])]).unwrap();
        assert_eq!(J(&f).unwrap(), 0.0);
        assert!(f.is_affine());
        let p = f.eval_affine(c(0.0, 1.0)).unwrap();
        assert!((p[0] - c(0.0, 1.0)).norm() < 1e-15);
        let k = make_polynomial_disc(&v(&[(1.0, 1.0)]), &[]).unwrap();
        assert_eq!(k.eval_affine(c(0.3, 0.9)).unwrap(), v(&[(1.0, 1.0)]));
        assert!(!boundary_trace(&f, &CircleGrid::new(32).unwrap()).any_near_infinity());
    }

    #[test]
    fn degenerate_trace() {
        let f = RationalDisc::new(vec![Polynomial::zero(), Polynomial::constant(c(1.0, 0.0))]).unwrap();
        let t = boundary_trace(&f, &CircleGrid::new(16).unwrap());
        assert!(t.near_infinity.iter().all(|&b| b));
        assert_eq!(J(&f).unwrap(), f64::INFINITY);
    }

    #[test]
    fn j_with_double_pole_and_common_factor() {
        // p_0 = (ζ - 0.3)^2 (ζ - 3), p_1 = 1
        let p0 = Polynomial::from_roots(&[c(0.3, 0.0), c(0.3, 0.0), c(3.0, 0.0)]);
        let f = RationalDisc::new(vec![p0.clone(), Polynomial::constant(c(1.0, 0.0))]).unwrap();
        assert!((J(&f).unwrap() + 2.0 * 0.3f64.ln()).abs() < 1e-12);
        // p_1 sharing one factor (ζ - 0.3): one intersection is removable
        let p1 = Polynomial::from_roots(&[c(0.3, 0.0), c(-2.0, 0.0)]);
        let g = RationalDisc::new(vec![p0, p1]).unwrap();
        assert!((J(&g).unwrap() + 0.3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn simplify_double_zero() {
        let p0 = Polynomial::from_roots(&[c(0.3, 0.0), c(0.3, 0.0)]);
        let p1 = Polynomial::new(vec![c(0.2, 0.0), c(0.05, 0.0)]);
        let f = RationalDisc::new(vec![p0, p1]).unwrap();
        let g = simplify_multiplicities(&f, 0.01).unwrap();
        let zs = zeros_in_disc(&g.components()[0]).unwrap();
        assert!(zs.entries.iter().all(|e| e.1 == 1));
        assert_eq!(zs.total_multiplicity(), 2);
        for (a, _) in &zs.entries {
            assert!((a.norm() - 0.3).abs() < 1e-12);
            assert!(a.arg().abs() <= 0.01 + 1e-12);
        }
        assert!((J(&g).unwrap() - J(&f).unwrap()).abs() < 1e-12);
        assert_eq!(g.centre().unwrap(), f.centre().unwrap());
    }

    #[test]
    fn simplify_identity_when_simple() {
        let f = make_touching_disc(&v(&[(2.0, 0.0)]), &ComplexVector::zeros(1), 1.0).unwrap();
        assert_eq!(simplify_multiplicities(&f, 0.01).unwrap(), f);
    }

    #[test]
    fn json_round_trip() {
        let f = make_touching_disc(&v(&[(1.0, 0.5)]), &ComplexVector::zeros(1), 0.5).unwrap();
        let g = RationalDisc::from_json(&f.to_json()).unwrap();
        assert_eq!(f.components(), g.components());
    }

    #[test]
    fn rotation_and_power_preserve_j() {
        let p0 = Polynomial::from_roots(&[c(0.4, 0.3), c(-0.2, 0.1), c(2.0, 1.0)]);
        let f = RationalDisc::new(vec![p0, Polynomial::constant(c(1.0, 0.0))]).unwrap();
        let j = J(&f).unwrap();
        assert!((J(&f.rotate(1.234)).unwrap() - j).abs() < 1e-10);
        for k in 1..=5 {
            assert!((J(&f.power(k)).unwrap() - j).abs() < 1e-8, "k = {k}");
        }
    }
}
