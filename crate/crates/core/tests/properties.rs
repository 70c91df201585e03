use magbar::counting::{count_1d_inertia, lemma53_constant, model_matrix, theorem51_constant};
use magbar::fiber::{solve_band, solve_bands};
use magbar::localization::turning_point;
use magbar::mourre::{f_n, f_ne, BudgetArgs, WindowConstants};
use magbar::specfun::{airy_moment, airy_zero, log_beta, AiryKind};
use magbar::{FieldStrength, Parity, SolverOptions};
use proptest::prelude::*;

fn field(b: f64) -> FieldStrength {
    FieldStrength::new(b).unwrap()
}

fn kind() -> impl Strategy<Value = AiryKind> {
    prop_oneof![Just(AiryKind::ZeroOfAi), Just(AiryKind::ZeroOfAiPrime)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn airy_zeros_negative_and_decreasing(k in kind(), j in 1usize..40) {
        let a = airy_zero(k, j).unwrap();
        let b = airy_zero(k, j + 1).unwrap();
        prop_assert!(a < 0.0 && b < a);
    }

    #[test]
    fn airy_moments_positive(k in kind(), j in 1usize..12, p in 0u32..=8) {
        prop_assert!(airy_moment(k, j, p).unwrap() > 0.0);
    }

    #[test]
    fn log_beta_symmetric(a in 0.05f64..20.0, b in 0.05f64..20.0) {
        let (x, y) = (log_beta(a, b).unwrap(), log_beta(b, a).unwrap());
        prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn budget_functional_monotone(d in 1e-4f64..0.5, a in 0.0f64..0.1, q in 0.0f64..0.1, da in 1e-6f64..0.1, dq in 1e-6f64..0.1, n in 1usize..4, d0 in 0.5f64..1.0, c in 0.05f64..1.0) {
        let base = BudgetArgs { delta: d, a_frak: a, q_frak: q };
        let w = WindowConstants { n, delta0: d0, c_n: c };
        prop_assert!((f_n(base).unwrap() - (d + q + 2.0 * a.sqrt())).abs() < 1e-14);
        let f = f_ne(base, w).unwrap();
        let more_a = f_ne(BudgetArgs { a_frak: a + da, ..base }, w).unwrap();
        let more_q = f_ne(BudgetArgs { q_frak: q + dq, ..base }, w).unwrap();
        prop_assert!(more_a > f && more_q > f);
    }

    #[test]
    fn theorem_constant_is_lemma_constant(alpha in 0.2f64..1.95, l in 0.1f64..10.0, beta in 0.05f64..5.0) {
        let t = theorem51_constant(alpha, l, beta).unwrap();
        let m = lemma53_constant(alpha, l, beta.sqrt()).unwrap();
        prop_assert!((t - m).abs() <= 1e-13 * t);
    }

    #[test]
    fn turning_point_scales(q in -3.0f64..3.0, w in 0.5f64..9.0, b in 0.1f64..100.0) {
        let x1 = turning_point(q, field(1.0), w);
        let xb = turning_point(q * b.sqrt(), field(b), w * b);
        prop_assert!((xb - x1 / b.sqrt()).abs() <= 1e-12 * x1.abs().max(1.0));
    }
}

fn random_well(n: usize, depth: f64, seed: u64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = ((i as u64).wrapping_mul(2654435761).wrapping_add(seed) % 1000) as f64 / 1000.0;
            depth * t * (-((i as f64 - n as f64 / 2.0).powi(2)) / n as f64).exp()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inertia_equals_bisection(n in 20usize..150, h in 0.05f64..0.4, m in 0.3f64..3.0, lambda in 1e-4f64..1.0, depth in 0.1f64..8.0, seed in 0u64..1000) {
        let q = random_well(n, depth, seed);
        prop_assert_eq!(model_matrix(m, &q, h).count_below(-lambda), count_1d_inertia(m, &q, h, lambda).unwrap());
    }

    #[test]
    fn counts_monotone_in_lambda_and_coupling(n in 20usize..150, h in 0.05f64..0.4, m in 0.3f64..3.0, l1 in 1e-4f64..1.0, l2 in 1e-4f64..1.0, g in 1.0f64..4.0, seed in 0u64..1000) {
        let q = random_well(n, 3.0, seed);
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        prop_assert!(count_1d_inertia(m, &q, h, lo).unwrap() >= count_1d_inertia(m, &q, h, hi).unwrap());
        let strong: Vec<f64> = q.iter().map(|v| g * v).collect();
        prop_assert!(count_1d_inertia(m, &strong, h, lo).unwrap() >= count_1d_inertia(m, &q, h, lo).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_law(j in 1usize..=6, q in -5.0f64..5.0, b in 0.25f64..50.0) {
        let opts = SolverOptions::default();
        let wb = solve_band(field(b), q * b.sqrt(), j, &opts).unwrap().omega;
        let w1 = solve_band(field(1.0), q, j, &opts).unwrap().omega;
        prop_assert!((wb - b * w1).abs() <= 1e-6 * b * w1);
    }

    #[test]
    fn eigenpairs_orthonormal_and_nonvanishing(k in -5.0f64..5.0, b in 0.5f64..10.0) {
        let pairs = solve_bands(field(b), k, 6, &SolverOptions::default()).unwrap();
        for p in &pairs {
            prop_assert!(p.psi0 * p.psi0 + p.dpsi0 * p.dpsi0 > 0.0);
        }
        for a in &pairs {
            for c in pairs.iter().filter(|c| c.parity == a.parity) {
                let h = a.grid.spacing();
                let ip: f64 = a.psi.iter().zip(&c.psi).enumerate()
                    .map(|(i, (x, y))| if i == 0 && a.parity == Parity::Even { 0.5 } else { 1.0 } * x * y)
                    .sum::<f64>() * 2.0 * h;
                let expect = if a.j == c.j { 1.0 } else { 0.0 };
                prop_assert!((ip - expect).abs() <= 1e-8, "<{},{}> = {}", a.j, c.j, ip);
            }
        }
    }

    #[test]
    fn landau_level_bounds(j in 1usize..=3, q in 0.0f64..5.0, b in 0.5f64..10.0) {
        let opts = SolverOptions::default();
        let k = q * b.sqrt();
        let odd = solve_band(field(b), k, 2 * j, &opts).unwrap().omega;
        let even = solve_band(field(b), k, 2 * j - 1, &opts).unwrap().omega;
        prop_assert!(odd > (2 * j - 1) as f64 * b);
        prop_assert!(even <= (4 * j - 3) as f64 * b * (1.0 + 1e-12));
    }

    #[test]
    fn odd_bands_strictly_decrease(j in 1usize..=3, q in -4.0f64..3.0, dq in 0.05f64..1.0) {
        let opts = SolverOptions::default();
        let a = solve_band(field(1.0), q, 2 * j, &opts).unwrap().omega;
        let c = solve_band(field(1.0), q + dq, 2 * j, &opts).unwrap().omega;
        prop_assert!(c < a);
    }
}
