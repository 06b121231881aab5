//! Derivative-free minimization: Nelder-Mead with dimension-adaptive
//! coefficients and in-place simplex restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the simplex spread in f falls below this.
    pub ftol: f64,
    /// Stop when the simplex diameter falls below this.
    pub xtol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            ftol: 1e-10,
            xtol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimize `f` from `x0` with initial simplex edge lengths `step`.
///
/// Uses the adaptive parameters of Gao and Han (reflection 1,
/// expansion 1 + 2/n, contraction 3/4 - 1/(2n), shrink 1 - 1/n). When the
/// simplex collapses before the budget is spent, it is rebuilt around the
/// best vertex with a quarter of the previous step; the run ends once a
/// rebuild no longer improves f.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        sanitize(f(x))
    };
    if n == 0 {
        let v = eval(x0, &mut evals);
        return Minimum {
            x: Vec::new(),
            f: v,
            evals,
            iterations: 0,
            converged: true,
        };
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0, &mut evals);
    let mut scale: Vec<f64> = step.to_vec();
    let mut iterations = 0usize;
    let mut converged = false;

    'outer: loop {
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut values: Vec<f64> = Vec::with_capacity(n + 1);
        simplex.push(best_x.clone());
        values.push(best_f);
        for i in 0..n {
            let mut v = best_x.clone();
            v[i] += if scale[i] != 0.0 { scale[i] } else { 2.5e-4 };
            let fv = eval(&v, &mut evals);
            simplex.push(v);
            values.push(fv);
        }
        let start_f = best_f;

        loop {
            if evals >= opts.max_evals {
                break 'outer;
            }
            iterations += 1;
            // order
            let mut idx: Vec<usize> = (0..=n).collect();
            idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
            values = idx.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let diam = simplex[1..]
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if (spread.is_finite() && spread <= opts.ftol) || diam <= opts.xtol {
                break;
            }

            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < values[0] {
                let xe = along(alpha * beta);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = along(alpha * gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            // shrink toward the best vertex
            for i in 1..=n {
                let v: Vec<f64> = simplex[0]
                    .iter()
                    .zip(&simplex[i])
                    .map(|(b, x)| b + delta * (x - b))
                    .collect();
                values[i] = eval(&v, &mut evals);
                simplex[i] = v;
                if evals >= opts.max_evals {
                    break;
                }
            }
        }

        let (bi, bf) = values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        if bf < best_f {
            best_f = bf;
            best_x = simplex[bi].clone();
        }
        let improved = start_f - best_f;
        if !(improved > opts.ftol) {
            converged = true;
            break;
        }
        for s in scale.iter_mut() {
            *s *= 0.25;
        }
    }

    Minimum {
        x: best_x,
        f: best_f,
        evals,
        iterations,
        converged,
    }
}

/// Deterministic RNG for restart `restart` of query `point` under `seed`.
pub fn restart_rng(seed: u64, point: u64, restart: u64) -> ChaCha8Rng {
    // splitmix-style mixing so that neighbouring indices decorrelate
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in [point, restart] {
        h ^= v.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 31;
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Gaussian-ish perturbation used to scatter restarts around a seed.
pub fn perturb<R: Rng>(rng: &mut R, x: &[f64], scale: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(scale)
        .map(|(v, s)| {
            // sum of uniforms: cheap and bounded
            let u: f64 = (0..4).map(|_| rng.random::<f64>() - 0.5).sum::<f64>();
            v + s * u
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(
            f,
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &NelderMeadOptions {
                max_evals: 5000,
                ..Default::default()
            },
        );
        assert!(m.f < 1e-10, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn handles_infeasible_regions() {
        // +inf outside the half-plane x > 0
        let f = |x: &[f64]| {
            if x[0] <= 0.0 {
                f64::INFINITY
            } else {
                (x[0] - 2.0).powi(2) + x[1].powi(2)
            }
        };
        let m = nelder_mead(f, &[0.5, 1.0], &[0.1, 0.1], &NelderMeadOptions::default());
        assert!(m.f < 1e-8);
    }

    #[test]
    fn quadratic_in_ten_dimensions() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 1.0).powi(2)).sum();
        let m = nelder_mead(
            f,
            &[0.0; 10],
            &[0.5; 10],
            &NelderMeadOptions {
                max_evals: 20_000,
                ..Default::default()
            },
        );
        assert!(m.f < 1e-8, "{}", m.f);
    }

    #[test]
    fn budget_is_respected() {
        let mut count = 0;
        let m = nelder_mead(
            |x: &[f64]| {
                count += 1;
                x[0].sin() + x[1].cos()
            },
            &[0.0, 0.0],
            &[1.0, 1.0],
            &NelderMeadOptions {
                max_evals: 50,
                ..Default::default()
            },
        );
        assert!(m.evals <= 52);
        assert_eq!(m.evals, count);
    }

    #[test]
    fn restart_rng_is_deterministic() {
        let a: u64 = restart_rng(7, 3, 1).random();
        let b: u64 = restart_rng(7, 3, 1).random();
        let c: u64 = restart_rng(7, 3, 2).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
