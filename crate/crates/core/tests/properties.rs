use discenv::discs::{RationalDisc, J};
use discenv::functionals::riesz_residual;
use discenv::poly::Polynomial;
use discenv::primitives::{proj_normalize, CircleGrid};
use discenv::Complex64;
use proptest::prelude::*;

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

/// A root of modulus in [0.1, 0.9].
fn inner_root() -> impl Strategy<Value = Complex64> {
    (0.1f64..0.9, 0.0f64..std::f64::consts::TAU).prop_map(|(m, t)| Complex64::from_polar(m, t))
}

prop_compose! {
    fn disc()(roots in prop::collection::vec(inner_root(), 1..=6),
              comps in prop::collection::vec(prop::collection::vec(complex(1.0), 1..=7), 1..=3))
              -> RationalDisc {
        let mut all = vec![Polynomial::from_roots(&roots)];
        all.extend(comps.into_iter().map(Polynomial::new));
        RationalDisc::new(all).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_ignores_scale(raw in prop::collection::vec(complex(10.0), 2..5), lambda in complex(5.0)) {
        let mut mods: Vec<f64> = raw.iter().map(|c| c.norm()).collect();
        mods.sort_by(|a, b| b.total_cmp(a));
        prop_assume!(mods[0] > 1e-3 && mods[0] > mods[1] * (1.0 + 1e-9));
        prop_assume!(lambda.norm() > 1e-3);
        let a = proj_normalize(&raw).unwrap();
        let scaled: Vec<Complex64> = raw.iter().map(|c| c * lambda).collect();
        let b = proj_normalize(&scaled).unwrap();
        for (x, y) in a.coords().iter().zip(b.coords()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn j_invariant_under_rotation_and_powers(f in disc(), theta in 0.0f64..6.3, k in 1usize..=5) {
        let j = J(&f).unwrap();
        prop_assert!((J(&f.rotate(theta)).unwrap() - j).abs() < 1e-10);
        prop_assert!((J(&f.power(k)).unwrap() - j).abs() < 1e-8);
    }

    #[test]
    fn riesz_identity(f in disc()) {
        let grid = CircleGrid::new(2048).unwrap();
        prop_assert!(riesz_residual(&f, &grid).unwrap() < 1e-8);
    }
}
