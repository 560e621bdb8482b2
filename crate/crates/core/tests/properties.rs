use std::f64::consts::PI;

use flatlab_core::cech::{data, CharacterValue, Scalars};
use flatlab_core::dbar::{hyperbolic_invariance, CutoffSpec, PolarGrid};
use flatlab_core::family::{check_identities, ChartFamily, FamilyConfig};
use flatlab_core::laurent::cyclo::{cyclotomic_polynomial, euler_phi};
use flatlab_core::laurent::{Cyclo, LaurentPoly};
use flatlab_core::theta::{LatticePoint, ThetaParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nerve_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("circle3"), Just("wedge2"), Just("torus9"), Just("rp2")]
}

fn cyclo(cond: u32) -> impl Strategy<Value = Cyclo> {
    let deg = euler_phi(cond) as usize;
    prop::collection::vec((-5i64..=5, 1i64..=4), deg).prop_map(move |cs| {
        cs.into_iter()
            .enumerate()
            .fold(Cyclo::zero(cond), |acc, (k, (n, d))| {
                acc.add(&Cyclo::root_of_unity(cond, k as i64).mul(&Cyclo::from_ratio(cond, n, d)))
            })
    })
}

fn poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec(((-3i64..=3, -3i64..=3), -4i64..=4), 1..5).prop_map(|terms| {
        terms.into_iter().fold(LaurentPoly::zero(2, 1), |acc, ((a, b), c)| {
            acc.add(&LaurentPoly::monomial(vec![a, b], Cyclo::from_int(1, c)))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn euler_characteristic_is_character_independent(name in nerve_name(), seed in any::<u64>()) {
        let c = data::nerve_by_name(name).unwrap().validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = CharacterValue::random(&mut rng, c.free_rank(), c.torsion_orders());
        let dims = c.cohomology_dims(&chi, Scalars::Numeric { tol: 1e-9 }).unwrap();
        let alt: i64 = dims.iter().enumerate().map(|(p, &d)| if p % 2 == 0 { d as i64 } else { -(d as i64) }).sum();
        prop_assert_eq!(alt, c.euler_characteristic());
    }

    #[test]
    fn coboundary_squares_to_zero(name in nerve_name(), seed in any::<u64>()) {
        let c = data::nerve_by_name(name).unwrap().validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = CharacterValue::random(&mut rng, c.free_rank(), c.torsion_orders());
        for nu in 0..c.dimension().saturating_sub(1) {
            let a = c.coboundary_numeric(nu, &chi).unwrap();
            let b = c.coboundary_numeric(nu + 1, &chi).unwrap();
            let prod = b * a;
            prop_assert!(prod.iter().all(|z| z.norm() < 1e-9));
        }
    }

    #[test]
    fn normalization_is_idempotent(p in poly()) {
        let n = p.normalized();
        prop_assert_eq!(n.normalized(), n.clone());
        if let Some((_, lead)) = n.leading() {
            prop_assert!(lead.is_one());
        }
    }

    #[test]
    fn normalization_ignores_unit_multiples(p in poly(), a in -3i64..=3, b in -3i64..=3, k in 1i64..=5) {
        prop_assume!(!p.is_zero());
        let unit = LaurentPoly::monomial(vec![a, b], Cyclo::from_int(1, k));
        prop_assert_eq!(p.mul(&unit).normalized(), p.normalized());
    }

    #[test]
    fn cyclotomic_inverse(x in cyclo(12)) {
        prop_assume!(!x.is_zero());
        prop_assert!(x.mul(&x.inv().unwrap()).is_one());
    }

    #[test]
    fn embedding_preserves_value(x in cyclo(6)) {
        let e = x.embed(30);
        prop_assert!((e.to_complex() - x.to_complex()).norm() < 1e-9);
    }

    #[test]
    fn theta_even_and_periodic(re in -1.0f64..1.0, im in -1.0f64..1.0, p in -3i64..=3) {
        let params = ThetaParams::standard_2d();
        let z = vec![Complex64::new(re, im), Complex64::new(im, -re)];
        let neg: Vec<Complex64> = z.iter().map(|w| -w).collect();
        let t = params.theta(&z).unwrap();
        prop_assert!((t - params.theta(&neg).unwrap()).norm() < 1e-12 * t.norm().max(1.0));
        let r = params.quasi_periodicity(&z, &LatticePoint::new(vec![p, -p], vec![0, 0])).unwrap();
        prop_assert!(r.normalized < 1e-10 * t.norm().max(1.0));
    }

    #[test]
    fn cutoff_is_a_ramp(r1 in 0.05f64..0.6, gap in 0.05f64..0.3, m in 1u32..4, r in 1e-3f64..0.999) {
        let r2 = (r1 + gap).min(0.95);
        let s = CutoffSpec::new(r1, r2, m).unwrap();
        let v = s.profile(r);
        prop_assert!((0.0..=1.0).contains(&v));
        if r < r1.powi(m as i32) { prop_assert_eq!(v, 1.0); }
        if r > r2.powi(m as i32) { prop_assert_eq!(v, 0.0); }
    }

    #[test]
    fn hyperbolic_difference_is_log_m(m in 1u32..8, r in 1e-6f64..0.99) {
        prop_assert!(hyperbolic_invariance(m, &[r]).unwrap() < 1e-12);
    }

    #[test]
    fn polar_quadrature_integrates_constants(lo in 1e-5f64..0.1, hi in 0.2f64..2.0, nr in 3usize..40, nt in 4usize..40) {
        let g = PolarGrid::new(lo, hi, nr, nt).unwrap();
        prop_assert!((g.area() - PI * (hi * hi - lo * lo)).abs() < 1e-12 * g.area());
    }

    #[test]
    fn family_cocycles_hold_for_any_shifts(shifts in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 9), seed in any::<u64>()) {
        let cfg = FamilyConfig { shifts: shifts.into_iter().map(|(a, b)| [a, b]).collect(), ..FamilyConfig::default() };
        let fam = ChartFamily::new(&cfg).unwrap();
        let r = check_identities(&fam, 3, seed).unwrap();
        prop_assert!(r.line_cocycle < 1e-12 && r.jet_cocycle < 1e-12);
        prop_assert!(r.metric_compatibility < 1e-10 && r.jet_metric_compatibility < 1e-10);
    }
}

#[test]
fn cyclotomic_degrees_match_totient() {
    for n in 1..=30u32 {
        assert_eq!(cyclotomic_polynomial(n).len() as u32 - 1, euler_phi(n), "n = {n}");
    }
}
