use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relaycap::gauss_mi::{GaussError, GaussianSystem};

/// Determinant by Gaussian elimination with partial pivoting.
fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            let (top, rest) = m.split_at_mut(r);
            for (x, y) in rest[0][c..].iter_mut().zip(&top[c][c..]) {
                *x -= f * y;
            }
        }
    }
    d
}

fn sub(cov: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| cov[i][j]).collect())
        .collect()
}

/// `I(A;B|C)` from determinants of index sets.
fn reference_cmi(cov: &[Vec<f64>], a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let join = |x: &[usize], y: &[usize]| [x, y].concat();
    let dc = if c.is_empty() { 1.0 } else { det(sub(cov, c)) };
    let dac = det(sub(cov, &join(a, c)));
    let dbc = det(sub(cov, &join(b, c)));
    let dabc = det(sub(cov, &join(&join(a, b), c)));
    0.5 * (dac * dbc / (dc * dabc)).log2()
}

/// `A·Aᵀ + I` for a random `n × n` matrix `A`.
fn random_cov(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).map(|k| a[i][k] * a[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

const NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

fn system(cov: &[Vec<f64>]) -> GaussianSystem<f64> {
    GaussianSystem::from_covariance(&NAMES[..cov.len()], cov).unwrap()
}

#[test]
fn awgn_example() {
    let sys = GaussianSystem::<f64>::new()
        .add_independent("x", 1.0)
        .unwrap()
        .add_independent("z", 1.0)
        .unwrap();
    let sys = sys
        .extend_linear("y", &[("x", 1.0), ("z", 1.0)], 0.0)
        .unwrap();
    assert!((sys.mutual_information(&["x"], &["y"]).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn irrelevant_conditioning() {
    let sys = GaussianSystem::<f64>::new()
        .add_independent("x", 2.0)
        .unwrap()
        .add_independent("w", 3.0)
        .unwrap()
        .extend_linear("y", &[("x", 1.0)], 1.0)
        .unwrap();
    let plain = sys.mutual_information(&["x"], &["y"]).unwrap();
    let cond = sys.conditional_mi(&["x"], &["y"], &["w"]).unwrap();
    assert!((plain - cond).abs() < 1e-12);
    assert!((plain - 0.5 * 3f64.log2()).abs() < 1e-12);
}

#[test]
fn measurable_conditioning_is_zero() {
    let sys = GaussianSystem::<f64>::new()
        .add_independent("x", 1.0)
        .unwrap()
        .extend_linear("y", &[("x", 1.0)], 1.0)
        .unwrap()
        .extend_linear("copy", &[("x", 1.0)], 0.0)
        .unwrap();
    assert_eq!(sys.conditional_mi(&["y"], &["copy"], &["x"]).unwrap(), 0.0);
    assert!(matches!(
        sys.conditional_mi(&["y"], &["x"], &["x"]),
        Err(GaussError::Overlap(_))
    ));
}

#[test]
fn hyper_converse_private_stream() {
    // I(X1D; Y3 | X2, S) with no correlations and unit powers.
    let sys = GaussianSystem::<f64>::new()
        .add_independent("s", 1.0)
        .unwrap()
        .add_independent("x2", 1.0)
        .unwrap()
        .add_independent("x1d", 1.0)
        .unwrap()
        .add_independent("z3", 1.0)
        .unwrap()
        .extend_linear(
            "y3",
            &[("x1d", 1.0), ("x2", 1.0), ("s", 1.0), ("z3", 1.0)],
            0.0,
        )
        .unwrap();
    let v = sys.conditional_mi(&["x1d"], &["y3"], &["x2", "s"]).unwrap();
    assert!((v - 0.5).abs() < 1e-12);
}

#[test]
fn rejects_indefinite_and_unknown() {
    let bad = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
    assert!(GaussianSystem::from_covariance(&["a", "b"], &bad).is_err());
    let sys = system(&random_cov(&mut ChaCha8Rng::seed_from_u64(1), 2));
    assert!(matches!(
        sys.mutual_information(&["a"], &["zz"]),
        Err(GaussError::UnknownName(_))
    ));
}

#[test]
fn monte_carlo_brackets_exact_values() {
    let sys = GaussianSystem::<f64>::new()
        .add_independent("x", 1.0)
        .unwrap()
        .add_independent("w", 1.0)
        .unwrap()
        .extend_linear("y", &[("x", 1.0)], 1.0)
        .unwrap();
    let (est, se) = sys.mc_mi_estimate(&["x"], &["y"], 100_000, 3).unwrap();
    assert!((est - 0.5).abs() <= 3.0 * se, "{est} ± {se}");
    let (est, se) = sys.mc_mi_estimate(&["x"], &["w"], 100_000, 4).unwrap();
    assert!(est.abs() <= 3.0 * se, "{est} ± {se}");
    assert_eq!(
        sys.mc_mi_estimate(&["x"], &["y"], 5000, 9).unwrap(),
        sys.mc_mi_estimate(&["x"], &["y"], 5000, 9).unwrap()
    );
    assert!(matches!(
        sys.mc_mi_estimate(&["x"], &["y"], 10, 9),
        Err(GaussError::TooFewSamples(10))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_reference_determinants(seed in any::<u64>()) {
        let cov = random_cov(&mut ChaCha8Rng::seed_from_u64(seed), 5);
        let sys = system(&cov);
        let got = sys.conditional_mi(&["a", "b"], &["c"], &["d", "e"]).unwrap();
        let want = reference_cmi(&cov, &[0, 1], &[2], &[3, 4]);
        prop_assert!((got - want).abs() < 1e-10, "{} vs {}", got, want);
        let got = sys.mutual_information(&["e"], &["a", "c"]).unwrap();
        let want = reference_cmi(&cov, &[4], &[0, 2], &[]);
        prop_assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn symmetry_nonnegativity_and_chain_rule(seed in any::<u64>()) {
        let sys = system(&random_cov(&mut ChaCha8Rng::seed_from_u64(seed), 5));
        let ab = sys.mutual_information(&["a"], &["b", "c"]).unwrap();
        let ba = sys.mutual_information(&["b", "c"], &["a"]).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= -1e-9);
        let ac = sys.mutual_information(&["a"], &["c"]).unwrap();
        let ab_c = sys.conditional_mi(&["a"], &["b"], &["c"]).unwrap();
        prop_assert!((ab - ac - ab_c).abs() < 1e-9);
    }

    #[test]
    fn data_processing(seed in any::<u64>(), noise in 0.01f64..10.0) {
        let sys = system(&random_cov(&mut ChaCha8Rng::seed_from_u64(seed), 3));
        let ext = sys.extend_linear("y", &[("b", 1.0)], noise).unwrap();
        let direct = ext.mutual_information(&["a"], &["b"]).unwrap();
        let noisy = ext.mutual_information(&["a"], &["y"]).unwrap();
        prop_assert!(noisy <= direct + 1e-9);
    }
}
