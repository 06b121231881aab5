//! The field E_B J(z) = inf_{w∈X} log⁺(‖z-w‖/d(w,∂X)) over inscribed balls.

use dashmap::DashMap;
use num_complex::Complex64;

use crate::domains::{dist, Domain, DomainKind};
use crate::optimize::{nelder_mead, restart_rng, NelderMeadOptions};
use crate::primitives::ComplexVector;

/// Cache keys round coordinates to this resolution.
const KEY_SCALE: f64 = 1e6;
const DICTIONARY_SIZE: usize = 256;

struct Part {
    domain: Domain,
    /// Balls B(w, d) ⊂ part, used for the fast upper bound.
    dictionary: Vec<(Vec<Complex64>, f64)>,
    centre: ComplexVector,
    cache: DashMap<Vec<i64>, Vec<f64>>,
}

enum Piece {
    Ball { center: ComplexVector, radius: f64 },
    Numeric(Box<Part>),
}

/// Memoized E_B J field of a domain. Disjoint unions split into their
/// parts, since the boundary distance of a point is that of its own part.
pub struct EbjField {
    domain: Domain,
    pieces: Vec<Piece>,
}

fn flatten(x: &Domain, out: &mut Vec<Domain>) {
    match x.kind() {
        DomainKind::Union { parts } => parts.iter().for_each(|p| flatten(p, out)),
        _ => out.push(x.clone()),
    }
}

fn key_of(z: &[Complex64]) -> Vec<i64> {
    z.iter()
        .flat_map(|c| [(c.re * KEY_SCALE).round() as i64, (c.im * KEY_SCALE).round() as i64])
        .collect()
}

fn ratio(part: &Domain, z: &[Complex64], w: &[Complex64]) -> f64 {
    let d = part.sd_coords(w);
    if d <= 0.0 {
        return f64::INFINITY;
    }
    (dist(z, w) / d).ln().max(0.0)
}

impl Part {
    fn new(domain: Domain, seed: u64) -> Self {
        let (centre, r) = domain.inscribed_ball();
        let mut dictionary = vec![(centre.coords().to_vec(), r)];
        let mut rng = restart_rng(seed, 0x0065_626a, 0);
        for w in domain.sample_interior(&mut rng, DICTIONARY_SIZE) {
            let d = domain.sd_coords(w.coords());
            if d > 0.0 {
                dictionary.push((w.coords().to_vec(), d));
            }
        }
        Self {
            domain,
            dictionary,
            centre,
            cache: DashMap::new(),
        }
    }

    fn fast(&self, z: &[Complex64]) -> f64 {
        self.dictionary
            .iter()
            .map(|(w, d)| dist(z, w) / d)
            .fold(f64::INFINITY, f64::min)
            .ln()
            .max(0.0)
    }

    fn argmin(&self, z: &[Complex64]) -> Vec<Complex64> {
        let key = key_of(z);
        if let Some(w) = self.cache.get(&key) {
            return to_complex(&w);
        }
        // solve at the rounded point so the stored minimizer depends on the key only
        let zk: Vec<Complex64> = key
            .chunks(2)
            .map(|p| Complex64::new(p[0] as f64 / KEY_SCALE, p[1] as f64 / KEY_SCALE))
            .collect();
        let w = self.solve(&zk);
        self.cache.insert(key, w.clone());
        to_complex(&w)
    }

    fn solve(&self, z: &[Complex64]) -> Vec<f64> {
        let obj = |x: &[f64]| -> f64 {
            let w = to_complex(x);
            let d = self.domain.sd_coords(&w);
            if d <= 0.0 {
                return f64::INFINITY;
            }
            dist(z, &w).ln() - d.ln()
        };
        let c = self.centre.coords();
        let mut starts: Vec<Vec<f64>> = vec![to_reals(c)];
        for t in [0.3, 0.6, 0.9] {
            let p: Vec<Complex64> = c.iter().zip(z).map(|(a, b)| a + (b - a) * t).collect();
            if self.domain.sd_coords(&p) > 0.0 {
                starts.push(to_reals(&p));
            }
        }
        let best_dict = self
            .dictionary
            .iter()
            .min_by(|a, b| (dist(z, &a.0) / a.1).total_cmp(&(dist(z, &b.0) / b.1)))
            .expect("dictionary holds the inscribed ball");
        starts.push(to_reals(&best_dict.0));
        let mut scored: Vec<(f64, Vec<f64>)> = starts.into_iter().map(|s| (obj(&s), s)).collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let opts = NelderMeadOptions {
            max_evals: 60 * c.len() * 2,
            ftol: 1e-14,
            xtol: 1e-12,
        };
        let mut probe = Vec::new();
        let smooth = self.domain.sd_pieces(c, &mut probe);
        let mut best = scored[0].clone();
        for (_, s) in scored.iter().take(2) {
            let mut x = s.clone();
            let mut fx = obj(&x);
            if smooth {
                // the minimum typically sits on a ridge where two pieces of
                // d(w) agree; follow it through soft-min smoothings
                let scale = self.dictionary[0].1.max(1e-9);
                for k in 1..=5 {
                    let beta = 10f64.powf(1.5 * k as f64) / scale;
                    let soft = |p: &[f64]| -> f64 {
                        let w = to_complex(p);
                        let mut pieces = Vec::with_capacity(probe.len());
                        self.domain.sd_pieces(&w, &mut pieces);
                        let m = pieces.iter().copied().fold(f64::INFINITY, f64::min);
                        let s: f64 = pieces.iter().map(|d| (-beta * (d - m)).exp()).sum();
                        let d = m - s.ln() / beta;
                        if d <= 0.0 {
                            return f64::INFINITY;
                        }
                        dist(z, &w).ln() - d.ln()
                    };
                    let d = self.domain.sd_coords(&to_complex(&x)).max(1e-9);
                    let step = (0.25 * d).min(10.0 / beta);
                    let m = nelder_mead(soft, &x, &vec![step; x.len()], &opts);
                    let fm = obj(&m.x);
                    if fm.is_finite() {
                        x = m.x;
                        if fm < fx {
                            fx = fm;
                        }
                    }
                }
            }
            let d = self.domain.sd_coords(&to_complex(&x)).max(1e-9);
            let m = nelder_mead(obj, &x, &vec![0.01 * d; x.len()], &opts);
            if m.f < fx {
                x = m.x;
                fx = m.f;
            }
            if fx < best.0 {
                best = (fx, x);
            }
        }
        best.1
    }
}

fn to_reals(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

impl EbjField {
    pub fn new(x: &Domain, seed: u64) -> Self {
        let mut parts = Vec::new();
        flatten(x, &mut parts);
        let pieces = parts
            .into_iter()
            .enumerate()
            .map(|(k, p)| match p.kind() {
                DomainKind::Ball { center, radius } => Piece::Ball {
                    center: center.clone(),
                    radius: *radius,
                },
                _ => Piece::Numeric(Box::new(Part::new(p, seed.wrapping_add(k as u64)))),
            })
            .collect();
        Self {
            domain: x.clone(),
            pieces,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Whether [`EbjField::value`] and [`EbjField::fast`] coincide.
    pub fn is_closed_form(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p, Piece::Ball { .. }))
    }

    /// E_B J(z) up to the inner optimizer gap; always an upper bound.
    pub fn value(&self, z: &ComplexVector) -> f64 {
        self.value_coords(z.coords())
    }

    pub(crate) fn value_coords(&self, z: &[Complex64]) -> f64 {
        if self.domain.contains_coords(z) {
            return 0.0;
        }
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Ball { center, radius } => (dist(z, center.coords()) / radius).ln().max(0.0),
                Piece::Numeric(part) => ratio(&part.domain, z, &part.argmin(z)),
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Cheap upper bound over a fixed dictionary of inscribed balls; exact
    /// for balls and unions of balls.
    pub(crate) fn fast(&self, z: &[Complex64]) -> f64 {
        if self.domain.contains_coords(z) {
            return 0.0;
        }
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Ball { center, radius } => (dist(z, center.coords()) / radius).ln().max(0.0),
                Piece::Numeric(part) => part.fast(z),
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// A ball B(w, d) ⊂ X realizing the value at z (for z ∉ X).
    pub fn minimizer(&self, z: &ComplexVector) -> (ComplexVector, f64) {
        let zc = z.coords();
        let mut best: Option<(f64, Vec<Complex64>, f64)> = None;
        for p in &self.pieces {
            let (w, d) = match p {
                Piece::Ball { center, radius } => (center.coords().to_vec(), *radius),
                Piece::Numeric(part) => {
                    let w = part.argmin(zc);
                    let d = part.domain.sd_coords(&w);
                    (w, d)
                }
            };
            let v = dist(zc, &w) / d;
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, w, d));
            }
        }
        let (_, w, d) = best.expect("domains have at least one part");
        (ComplexVector::new(w).expect("finite"), d)
    }

    /// Centres of the inscribed balls of the parts.
    pub fn centres(&self) -> Vec<&ComplexVector> {
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Ball { center, .. } => center,
                Piece::Numeric(part) => &part.centre,
            })
            .collect()
    }

    pub fn cache_len(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Numeric(part) => part.cache.len(),
                Piece::Ball { .. } => 0,
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ball_closed_form() {
        let x = Domain::ball(ComplexVector::new(vec![c(1.0, 0.0)]).unwrap(), 2.0).unwrap();
        let f = EbjField::new(&x, 0);
        let z = ComplexVector::new(vec![c(1.0, 5.0)]).unwrap();
        assert!((f.value(&z) - (2.5f64).ln()).abs() < 1e-15);
        assert_eq!(f.value(&ComplexVector::new(vec![c(1.5, 0.0)]).unwrap()), 0.0);
    }

    #[test]
    fn annulus_matches_radial_formula() {
        let outer = Domain::ball(ComplexVector::zeros(1), 2.0).unwrap();
        let x = Domain::difference(outer, ComplexVector::zeros(1), 1.0).unwrap();
        let f = EbjField::new(&x, 7);
        // for |z| < 1 the best ball sits on |w| = 1.5 with radius 0.5
        for r in [0.0, 0.3, 0.7] {
            let z = ComplexVector::new(vec![c(r, 0.0)]).unwrap();
            assert!((f.value(&z) - (3.0 - 2.0 * r).ln()).abs() < 1e-6, "r = {r}");
        }
        let z = ComplexVector::new(vec![c(0.0, 3.0)]).unwrap();
        assert!((f.value(&z) - 3.0f64.ln()).abs() < 1e-6);
        assert!(f.fast(z.coords()) >= f.value(&z) - 1e-12);
    }

    #[test]
    fn cached_values_stay_upper_bounds() {
        let outer = Domain::ball(ComplexVector::zeros(1), 2.0).unwrap();
        let x = Domain::difference(outer, ComplexVector::zeros(1), 1.0).unwrap();
        let f = EbjField::new(&x, 1);
        let z = ComplexVector::new(vec![c(0.2, 0.1)]).unwrap();
        let first = f.value(&z);
        let near = ComplexVector::new(vec![c(0.2 + 3e-7, 0.1)]).unwrap();
        let second = f.value(&near);
        assert_eq!(f.cache_len(), 1);
        let exact = (3.0 - 2.0 * near.norm()).ln();
        assert!(second >= exact - 1e-12, "{second} < {exact}");
        assert!(second - exact < 1e-5, "{second} vs {exact}");
        assert!((first - (3.0 - 2.0 * z.norm()).ln()).abs() < 1e-6);
    }
}
