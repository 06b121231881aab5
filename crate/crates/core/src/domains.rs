//! Open sets X ⊂ C^n with exact Euclidean distance to the boundary.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, restart_rng, NelderMeadOptions};
use crate::primitives::ComplexVector;

pub(crate) fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Open half-space `<normal, z>_R < offset` of R^{2n}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: ComplexVector,
    pub offset: f64,
}

impl HalfSpace {
    /// Signed distance to the bounding hyperplane, positive on the open side.
    fn slack(&self, z: &[Complex64]) -> f64 {
        let dot: f64 = self
            .normal
            .coords()
            .iter()
            .zip(z)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        (self.offset - dot) / self.normal.norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Ball {
        center: ComplexVector,
        radius: f64,
    },
    Polytope {
        halfspaces: Vec<HalfSpace>,
    },
    /// Pairwise disjoint, positively separated parts.
    Union {
        parts: Vec<Domain>,
    },
    /// `outer` minus a closed ball lying strictly inside it.
    Difference {
        outer: Box<Domain>,
        inner_center: ComplexVector,
        inner_radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    connected: bool,
    dim: usize,
}

impl Domain {
    pub fn ball(center: ComplexVector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        let dim = center.dim();
        Ok(Self {
            kind: DomainKind::Ball { center, radius },
            connected: true,
            dim,
        })
    }

    pub fn polytope(halfspaces: Vec<HalfSpace>) -> Result<Self> {
        let Some(first) = halfspaces.first() else {
            return Err(Error::InvalidDomain(
                "polytope needs at least one half-space".into(),
            ));
        };
        let dim = first.normal.dim();
        for (j, h) in halfspaces.iter().enumerate() {
            h.normal.check_dim(dim)?;
            if h.normal.norm() == 0.0 {
                return Err(Error::InvalidDomain(format!("half-space {j} has a zero normal")));
            }
            if !h.offset.is_finite() {
                return Err(Error::InvalidDomain(format!("half-space {j} has a non-finite offset")));
            }
        }
        let d = Self {
            kind: DomainKind::Polytope { halfspaces },
            connected: true,
            dim,
        };
        let (_, r) = d.inscribed_ball();
        if !(r > 1e-12) {
            return Err(Error::InvalidDomain("polytope is empty".into()));
        }
        Ok(d)
    }

    pub fn union(parts: Vec<Domain>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidDomain("union needs at least one part".into()));
        };
        let dim = first.dim;
        for p in &parts {
            if p.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim,
                });
            }
        }
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                check_disjoint(&parts[i], &parts[j], (i, j))?;
            }
        }
        Ok(Self {
            connected: parts.len() == 1 && first.connected,
            kind: DomainKind::Union { parts },
            dim,
        })
    }

    pub fn difference(outer: Domain, inner_center: ComplexVector, inner_radius: f64) -> Result<Self> {
        inner_center.check_dim(outer.dim)?;
        if !(inner_radius > 0.0) || !inner_radius.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "inner radius must be positive, got {inner_radius}"
            )));
        }
        let inside = outer.contains(&inner_center)?
            && outer.boundary_distance(&inner_center)? > inner_radius;
        if !inside {
            return Err(Error::InvalidDomain(
                "removed closed ball must lie strictly inside the outer domain".into(),
            ));
        }
        let dim = outer.dim;
        Ok(Self {
            connected: outer.connected,
            kind: DomainKind::Difference {
                outer: Box::new(outer),
                inner_center,
                inner_radius,
            },
            dim,
        })
    }

    /// Override the declared connectivity flag.
    pub fn with_connected(mut self, connected: bool) -> Self {
        self.connected = connected;
        self
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, z: &ComplexVector) -> Result<bool> {
        z.check_dim(self.dim)?;
        Ok(self.contains_unchecked(z))
    }

    pub(crate) fn contains_unchecked(&self, z: &ComplexVector) -> bool {
        self.contains_coords(z.coords())
    }

    pub(crate) fn contains_coords(&self, z: &[Complex64]) -> bool {
        match &self.kind {
            DomainKind::Ball { center, radius } => dist(z, center.coords()) < *radius,
            DomainKind::Polytope { halfspaces } => halfspaces.iter().all(|h| h.slack(z) > 0.0),
            DomainKind::Union { parts } => parts.iter().any(|p| p.contains_coords(z)),
            DomainKind::Difference {
                outer,
                inner_center,
                inner_radius,
            } => outer.contains_coords(z) && dist(z, inner_center.coords()) > *inner_radius,
        }
    }

    /// Exact `d(w, ∂X)` for `w ∈ X`.
    pub fn boundary_distance(&self, w: &ComplexVector) -> Result<f64> {
        w.check_dim(self.dim)?;
        if !self.contains_unchecked(w) {
            return Err(Error::OutsideDomain);
        }
        Ok(self.signed_distance(w).max(0.0))
    }

    /// Continuous function that is the exact boundary distance inside X,
    /// zero on ∂X and negative outside (its magnitude there is a lower bound
    /// for the distance to X, exact for balls).
    pub fn signed_distance(&self, z: &ComplexVector) -> f64 {
        self.sd_coords(z.coords())
    }

    pub(crate) fn sd_coords(&self, z: &[Complex64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => radius - dist(z, center.coords()),
            DomainKind::Polytope { halfspaces } => halfspaces
                .iter()
                .map(|h| h.slack(z))
                .fold(f64::INFINITY, f64::min),
            DomainKind::Union { parts } => parts
                .iter()
                .map(|p| p.sd_coords(z))
                .fold(f64::NEG_INFINITY, f64::max),
            DomainKind::Difference {
                outer,
                inner_center,
                inner_radius,
            } => outer
                .sd_coords(z)
                .min(dist(z, inner_center.coords()) - inner_radius),
        }
    }

    /// The smooth pieces whose minimum is the signed distance, when the
    /// domain is built from balls and half-spaces by intersection-like
    /// operations only (no unions).
    pub(crate) fn sd_pieces(&self, z: &[Complex64], out: &mut Vec<f64>) -> bool {
        match &self.kind {
            DomainKind::Ball { center, radius } => out.push(radius - dist(z, center.coords())),
            DomainKind::Polytope { halfspaces } => out.extend(halfspaces.iter().map(|h| h.slack(z))),
            DomainKind::Union { .. } => return false,
            DomainKind::Difference {
                outer,
                inner_center,
                inner_radius,
            } => {
                if !outer.sd_pieces(z, out) {
                    return false;
                }
                out.push(dist(z, inner_center.coords()) - inner_radius);
            }
        }
        true
    }

    /// Whether the E_B J field of this domain has a closed form (balls and
    /// disjoint unions of balls).
    pub fn is_ball_like(&self) -> bool {
        match &self.kind {
            DomainKind::Ball { .. } => true,
            DomainKind::Union { parts } => parts.iter().all(Domain::is_ball_like),
            _ => false,
        }
    }

    /// Centre and radius of a large ball inside X (exact for balls, the
    /// Chebyshev ball up to optimizer accuracy otherwise). Radius is 0 when
    /// no interior point was found.
    pub fn inscribed_ball(&self) -> (ComplexVector, f64) {
        match &self.kind {
            DomainKind::Ball { center, radius } => (center.clone(), *radius),
            DomainKind::Union { parts } => parts
                .iter()
                .map(Domain::inscribed_ball)
                .fold((ComplexVector::zeros(self.dim), 0.0), |best, c| {
                    if c.1 > best.1 {
                        c
                    } else {
                        best
                    }
                }),
            DomainKind::Polytope { .. } => self.maximize_depth(&[ComplexVector::zeros(self.dim)]),
            DomainKind::Difference {
                outer,
                inner_center,
                inner_radius,
            } => {
                let (oc, or) = outer.inscribed_ball();
                let mut starts = vec![oc.clone()];
                // points around the removed ball, between it and the outer boundary
                let gap = (or - inner_radius).max(0.0);
                for k in 0..2 * self.dim {
                    let mut e = vec![Complex64::new(0.0, 0.0); self.dim];
                    if k % 2 == 0 {
                        e[k / 2] = Complex64::new(1.0, 0.0);
                    } else {
                        e[k / 2] = Complex64::new(0.0, 1.0);
                    }
                    let dir = ComplexVector::new(e).expect("finite");
                    for sign in [1.0, -1.0] {
                        let off = &dir * (sign * (inner_radius + 0.5 * gap.max(*inner_radius)));
                        starts.push(&inner_center.clone() + &off);
                    }
                }
                self.maximize_depth(&starts)
            }
        }
    }

    /// Maximize the (capped) signed distance by multi-start Nelder-Mead.
    fn maximize_depth(&self, starts: &[ComplexVector]) -> (ComplexVector, f64) {
        const CAP: f64 = 1e6;
        let depth = |x: &[f64]| -> f64 {
            let z = ComplexVector::from_reals(x).expect("even length");
            -self.signed_distance(&z).min(CAP)
        };
        let mut best = (starts[0].clone(), f64::NEG_INFINITY);
        for (k, s) in starts.iter().enumerate() {
            let x0 = s.to_reals();
            let scale = 1.0f64.max(s.norm() * 0.1);
            let m = nelder_mead(
                depth,
                &x0,
                &vec![scale; x0.len()],
                &NelderMeadOptions {
                    max_evals: 400 * x0.len(),
                    ftol: 1e-13,
                    xtol: 1e-13,
                },
            );
            if -m.f > best.1 {
                best = (ComplexVector::from_reals(&m.x).expect("even"), -m.f);
            }
            if k > 0 && best.1 >= CAP {
                break;
            }
        }
        (best.0, best.1.max(0.0))
    }

    /// Random points of X near its inscribed ball (rejection sampling).
    pub fn sample_interior<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<ComplexVector> {
        match &self.kind {
            DomainKind::Union { parts } => {
                let per = count.div_ceil(parts.len());
                let mut out: Vec<ComplexVector> =
                    parts.iter().flat_map(|p| p.sample_interior(rng, per)).collect();
                out.truncate(count);
                out
            }
            DomainKind::Difference { outer, .. } => {
                let mut out = Vec::with_capacity(count);
                let mut tries = 0;
                while out.len() < count && tries < 50 {
                    tries += 1;
                    out.extend(
                        outer
                            .sample_interior(rng, count)
                            .into_iter()
                            .filter(|z| self.contains_unchecked(z)),
                    );
                }
                out.truncate(count);
                out
            }
            _ => self.sample_box(rng, count),
        }
    }

    fn sample_box<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<ComplexVector> {
        let (c, r) = self.inscribed_ball();
        let spread = match &self.kind {
            DomainKind::Ball { radius, .. } => *radius,
            _ => (3.0 * r).max(1e-3),
        };
        let mut out = Vec::with_capacity(count);
        let mut tries = 0;
        while out.len() < count && tries < 200 * count.max(1) {
            tries += 1;
            let coords = (0..self.dim)
                .map(|i| {
                    c[i] + Complex64::new(
                        spread * (2.0 * rng.random::<f64>() - 1.0),
                        spread * (2.0 * rng.random::<f64>() - 1.0),
                    )
                })
                .collect();
            let z = ComplexVector::new(coords).expect("finite");
            if self.contains_unchecked(&z) {
                out.push(z);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&DomainSpec::from(self)).expect("domain serializes")
    }
}

fn check_disjoint(a: &Domain, b: &Domain, idx: (usize, usize)) -> Result<()> {
    let overlap = || {
        Error::InvalidDomain(format!(
            "union parts {} and {} are not disjoint with positive separation",
            idx.0, idx.1
        ))
    };
    if let (
        DomainKind::Ball {
            center: ca,
            radius: ra,
        },
        DomainKind::Ball {
            center: cb,
            radius: rb,
        },
    ) = (&a.kind, &b.kind)
    {
        return if ca.dist(cb) > ra + rb { Ok(()) } else { Err(overlap()) };
    }
    // sampled check: interior samples of one part must not lie in the other,
    // and must stay a positive distance from it
    let mut rng = restart_rng(0x5eed, idx.0 as u64, idx.1 as u64);
    for (p, q) in [(a, b), (b, a)] {
        let (c, _) = p.inscribed_ball();
        if q.contains_unchecked(&c) {
            return Err(overlap());
        }
        for z in p.sample_interior(&mut rng, 400) {
            if q.signed_distance(&z) > -1e-12 {
                return Err(overlap());
            }
        }
    }
    Ok(())
}

// ---- JSON schema -------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum DomainSpec {
    Ball {
        center: ComplexVector,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        connected: Option<bool>,
    },
    Polytope {
        halfspaces: Vec<HalfSpace>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        connected: Option<bool>,
    },
    Union {
        parts: Vec<DomainSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        connected: Option<bool>,
    },
    Difference {
        outer: Box<DomainSpec>,
        inner_center: ComplexVector,
        inner_radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        connected: Option<bool>,
    },
}

impl DomainSpec {
    fn build(self) -> Result<Domain> {
        let (d, flag) = match self {
            DomainSpec::Ball {
                center,
                radius,
                connected,
            } => (Domain::ball(center, radius)?, connected),
            DomainSpec::Polytope {
                halfspaces,
                connected,
            } => (Domain::polytope(halfspaces)?, connected),
            DomainSpec::Union { parts, connected } => {
                let parts = parts
                    .into_iter()
                    .map(DomainSpec::build)
                    .collect::<Result<Vec<_>>>()?;
                (Domain::union(parts)?, connected)
            }
            DomainSpec::Difference {
                outer,
                inner_center,
                inner_radius,
                connected,
            } => (
                Domain::difference(outer.build()?, inner_center, inner_radius)?,
                connected,
            ),
        };
        Ok(match flag {
            Some(c) => d.with_connected(c),
            None => d,
        })
    }
}

impl From<&Domain> for DomainSpec {
    fn from(d: &Domain) -> Self {
        let default_connected = match &d.kind {
            DomainKind::Ball { .. } | DomainKind::Polytope { .. } => true,
            DomainKind::Union { parts } => parts.len() == 1 && parts[0].connected,
            DomainKind::Difference { outer, .. } => outer.connected,
        };
        let connected = (d.connected != default_connected).then_some(d.connected);
        match &d.kind {
            DomainKind::Ball { center, radius } => DomainSpec::Ball {
                center: center.clone(),
                radius: *radius,
                connected,
            },
            DomainKind::Polytope { halfspaces } => DomainSpec::Polytope {
                halfspaces: halfspaces.clone(),
                connected,
            },
            DomainKind::Union { parts } => DomainSpec::Union {
                parts: parts.iter().map(DomainSpec::from).collect(),
                connected,
            },
            DomainKind::Difference {
                outer,
                inner_center,
                inner_radius,
            } => DomainSpec::Difference {
                outer: Box::new(DomainSpec::from(outer.as_ref())),
                inner_center: inner_center.clone(),
                inner_radius: *inner_radius,
                connected,
            },
        }
    }
}

/// Parse and validate a domain document.
pub fn parse_domain(text: &str) -> Result<Domain> {
    let spec: DomainSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    spec.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(v: &[(f64, f64)]) -> ComplexVector {
        ComplexVector::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
    }

    fn unit_ball(n: usize) -> Domain {
        Domain::ball(ComplexVector::zeros(n), 1.0).unwrap()
    }

    #[test]
    fn ball_membership() {
        let b = unit_ball(2);
        assert!(b.contains(&pt(&[(0.5, 0.0), (0.0, 0.0)])).unwrap());
        assert!(!b.contains(&pt(&[(1.0, 0.0), (0.0, 0.0)])).unwrap());
        assert!(b.contains(&pt(&[(0.5, 0.0)])).is_err());
    }

    #[test]
    fn union_gap_point() {
        let u = Domain::union(vec![
            Domain::ball(pt(&[(-3.0, 0.0)]), 1.0).unwrap(),
            Domain::ball(pt(&[(3.0, 0.0)]), 1.0).unwrap(),
        ])
        .unwrap();
        assert!(!u.contains(&pt(&[(0.0, 0.0)])).unwrap());
        assert!(!u.is_connected());
        assert!((u.boundary_distance(&pt(&[(3.5, 0.0)])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distances() {
        let b = Domain::ball(ComplexVector::zeros(2), 2.0).unwrap();
        assert_eq!(b.boundary_distance(&pt(&[(1.0, 0.0), (0.0, 0.0)])).unwrap(), 1.0);

        let slab = Domain::polytope(vec![
            HalfSpace {
                normal: pt(&[(1.0, 0.0)]),
                offset: 1.0,
            },
            HalfSpace {
                normal: pt(&[(-1.0, 0.0)]),
                offset: 1.0,
            },
        ])
        .unwrap();
        assert_eq!(slab.boundary_distance(&pt(&[(0.0, 0.0)])).unwrap(), 1.0);
        assert_eq!(
            slab.boundary_distance(&pt(&[(2.0, 0.0)])),
            Err(Error::OutsideDomain)
        );
    }

    #[test]
    fn annulus_distance_matches_sampled_boundary() {
        let ann = Domain::difference(
            Domain::ball(ComplexVector::zeros(1), 2.0).unwrap(),
            ComplexVector::zeros(1),
            0.5,
        )
        .unwrap();
        let w = pt(&[(1.0, 0.0)]);
        let d = ann.boundary_distance(&w).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        // dense sampling of both boundary circles
        let sampled = (0..20_000)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 20_000.0;
                let e = Complex64::from_polar(1.0, t);
                ((e * 2.0 - w[0]).norm()).min((e * 0.5 - w[0]).norm())
            })
            .fold(f64::INFINITY, f64::min);
        assert!((sampled - d).abs() < 1e-6);
    }

    #[test]
    fn parse_examples() {
        let b = parse_domain(r#"{"type":"ball","center":[[0,0],[0,0]],"radius":1}"#).unwrap();
        assert_eq!(b.dim(), 2);
        assert!(b.is_connected());

        let u = parse_domain(
            r#"{"type":"union","parts":[
                {"type":"ball","center":[[-3,0]],"radius":1},
                {"type":"ball","center":[[3,0]],"radius":1}]}"#,
        )
        .unwrap();
        assert!(!u.is_connected());

        let bad = parse_domain(
            r#"{"type":"union","parts":[
                {"type":"ball","center":[[-0.5,0]],"radius":1},
                {"type":"ball","center":[[0.5,0]],"radius":1}]}"#,
        );
        assert!(matches!(bad, Err(Error::InvalidDomain(_))));

        let empty = parse_domain(
            r#"{"type":"polytope","halfspaces":[
                {"normal":[[1,0]],"offset":-1},
                {"normal":[[-1,0]],"offset":-1}]}"#,
        );
        assert!(matches!(empty, Err(Error::InvalidDomain(_))));

        assert!(matches!(
            parse_domain(r#"{"type":"ball","centre":[[0,0]],"radius":1}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn difference_and_mixed_union_parse() {
        let ann = parse_domain(
            r#"{"type":"difference","outer":{"type":"ball","center":[[0,0]],"radius":2},
                "inner_center":[[0,0]],"inner_radius":1}"#,
        )
        .unwrap();
        assert!(ann.is_connected());
        assert!(!ann.contains(&pt(&[(0.5, 0.0)])).unwrap());

        let mixed = parse_domain(
            r#"{"type":"union","parts":[
                {"type":"ball","center":[[-3,0]],"radius":1},
                {"type":"polytope","halfspaces":[{"normal":[[-1,0]],"offset":-2}]}]}"#,
        )
        .unwrap();
        assert!(mixed.contains(&pt(&[(5.0, 7.0)])).unwrap());

        let overlapping = parse_domain(
            r#"{"type":"union","parts":[
                {"type":"ball","center":[[3,0]],"radius":1},
                {"type":"polytope","halfspaces":[{"normal":[[-1,0]],"offset":-2}]}]}"#,
        );
        assert!(overlapping.is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"type":"difference","outer":{"type":"polytope","halfspaces":[
            {"normal":[[1,0],[0,0]],"offset":1},{"normal":[[-1,0],[0,0]],"offset":1},
            {"normal":[[0,1],[0,0]],"offset":1},{"normal":[[0,-1],[0,0]],"offset":1},
            {"normal":[[0,0],[1,0]],"offset":1},{"normal":[[0,0],[-1,0]],"offset":1},
            {"normal":[[0,0],[0,1]],"offset":1},{"normal":[[0,0],[0,-1]],"offset":1}]},
            "inner_center":[[0,0],[0,0]],"inner_radius":0.25,"connected":false}"#;
        let d = parse_domain(text).unwrap();
        assert!(!d.is_connected());
        let again = parse_domain(&d.to_json()).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn inscribed_ball_of_cube() {
        let cube = parse_domain(
            r#"{"type":"polytope","halfspaces":[
            {"normal":[[1,0]],"offset":1},{"normal":[[-1,0]],"offset":3},
            {"normal":[[0,1]],"offset":1},{"normal":[[0,-1]],"offset":1}]}"#,
        )
        .unwrap();
        let (_, r) = cube.inscribed_ball();
        assert!((r - 1.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn closed_balls_at_boundary_distance_stay_inside() {
        let domains = [
            unit_ball(2),
            parse_domain(
                r#"{"type":"difference","outer":{"type":"ball","center":[[0,0]],"radius":2},
                "inner_center":[[0.3,0]],"inner_radius":0.5}"#,
            )
            .unwrap(),
            parse_domain(
                r#"{"type":"polytope","halfspaces":[
                {"normal":[[1,1]],"offset":1},{"normal":[[-1,0]],"offset":1},{"normal":[[0,-1]],"offset":1}]}"#,
            )
            .unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in &domains {
            for w in d.sample_interior(&mut rng, 30) {
                let r = 0.999 * d.boundary_distance(&w).unwrap();
                assert!(r > 0.0);
                for _ in 0..200 {
                    let dir: Vec<Complex64> = (0..d.dim())
                        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                        .collect();
                    let dir = ComplexVector::new(dir).unwrap();
                    let unit = &dir * (1.0 / dir.norm());
                    assert!(d.contains(&(&w + &(&unit * r))).unwrap());
                }
            }
        }
    }
}
