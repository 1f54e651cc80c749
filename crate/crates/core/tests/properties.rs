//! Property tests against brute-force oracles.

use proptest::prelude::*;

use qops::channel::erasure_channel;
use qops::entropy::{l1_coherence_in_basis, von_neumann_entropy, wave_behavior, WAVE_THRESHOLD};
use qops::linalg::{eig_hermitian, kron, trace, Complex, ComplexMatrix, HERMITIAN_TOL};
use qops::measurement::{ket_probabilities, nonselective_update, outcome_distribution, Observable};
use qops::random::{
    random_density_any_rank, random_hermitian, random_ket, random_matrix, random_unitary,
};
use qops::rng::SplitMix64;
use qops::DensityOperator;

fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::new(seed)
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=3)
}

/// Reduced operator by explicit summation over every traced index.
fn partial_trace_oracle(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> ComplexMatrix {
    let total: usize = dims.iter().product();
    let kept: usize = keep.iter().map(|&s| dims[s]).product();
    let digits = |mut idx: usize| {
        let mut d = vec![0; dims.len()];
        for s in (0..dims.len()).rev() {
            d[s] = idx % dims[s];
            idx /= dims[s];
        }
        d
    };
    let kept_index = |d: &[usize]| keep.iter().fold(0, |acc, &s| acc * dims[s] + d[s]);
    let mut out = ComplexMatrix::zeros(kept, kept);
    for r in 0..total {
        let dr = digits(r);
        for c in 0..total {
            let dc = digits(c);
            let traced_match = (0..dims.len())
                .filter(|s| !keep.contains(s))
                .all(|s| dr[s] == dc[s]);
            if traced_match {
                out[(kept_index(&dr), kept_index(&dc))] += m[(r, c)];
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_entries_follow_big_endian_layout(seed in any::<u64>(), p in 1usize..4, q in 1usize..4, r in 1usize..4, s in 1usize..4) {
        let mut g = rng(seed);
        let a = random_matrix(p, q, &mut g);
        let b = random_matrix(r, s, &mut g);
        let k = kron(&a, &b).unwrap();
        prop_assert_eq!((k.rows(), k.cols()), (p * r, q * s));
        for i in 0..p { for j in 0..q { for x in 0..r { for y in 0..s {
            prop_assert_eq!(k[(i * r + x, j * s + y)], a[(i, j)] * b[(x, y)]);
        }}}}
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut g = rng(seed);
        let (a, c) = (random_matrix(n, n, &mut g), random_matrix(n, n, &mut g));
        let (b, d) = (random_matrix(m, m, &mut g), random_matrix(m, m, &mut g));
        let lhs = kron(&a, &b).unwrap().matmul(&kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn trace_of_kron_factorizes(seed in any::<u64>(), n in 1usize..5, m in 1usize..5) {
        let mut g = rng(seed);
        let a = random_matrix(n, n, &mut g);
        let b = random_matrix(m, m, &mut g);
        let lhs = trace(&kron(&a, &b).unwrap()).unwrap();
        let rhs = trace(&a).unwrap() * trace(&b).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn eigenvalues_invariant_under_unitary_conjugation(seed in any::<u64>(), n in 1usize..9) {
        let mut g = rng(seed);
        let a = random_hermitian(n, &mut g);
        let u = random_unitary(n, &mut g);
        let b = u.sandwich(&a).unwrap().hermitian_part().unwrap();
        let ea = eig_hermitian(&a, HERMITIAN_TOL).unwrap().eigenvalues;
        let eb = eig_hermitian(&b, HERMITIAN_TOL).unwrap().eigenvalues;
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..12) {
        let a = random_hermitian(n, &mut rng(seed));
        let s = eig_hermitian(&a, HERMITIAN_TOL).unwrap();
        prop_assert!(s.reconstruct().max_abs_diff(&a).unwrap() <= 1e-9);
        prop_assert!(s.eigenvectors.is_unitary(1e-9));
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn partial_trace_matches_summation_oracle(seed in any::<u64>(), dims in dims_strategy(), mask in any::<u8>()) {
        let rho = random_density_any_rank(&dims, &mut rng(seed));
        let mut keep: Vec<usize> = (0..dims.len()).filter(|s| mask >> s & 1 == 1).collect();
        if keep.is_empty() {
            keep.push(mask as usize % dims.len());
        }
        let got = rho.partial_trace(&keep).unwrap();
        let want = partial_trace_oracle(rho.matrix(), &dims, &keep);
        prop_assert!(got.matrix().max_abs_diff(&want).unwrap() <= 1e-12);
        let kept_dims: Vec<usize> = keep.iter().map(|&s| dims[s]).collect();
        prop_assert_eq!(got.dims(), &kept_dims[..]);
    }

    #[test]
    fn partial_traces_compose(seed in any::<u64>(), a in 1usize..=3, b in 1usize..=3, c in 1usize..=3) {
        let dims = vec![a, b, c];
        let rho = random_density_any_rank(&dims, &mut rng(seed));
        let direct = rho.partial_trace(&[2]).unwrap();
        let staged = rho.partial_trace(&[1, 2]).unwrap().partial_trace(&[1]).unwrap();
        prop_assert!(direct.matrix().max_abs_diff(staged.matrix()).unwrap() <= 1e-12);
    }

    #[test]
    fn measurement_probabilities_are_complete(seed in any::<u64>(), d in 2usize..=4) {
        let mut g = rng(seed);
        let rho = random_density_any_rank(&[d], &mut g);
        let obs = Observable::in_basis(&random_unitary(d, &mut g), &(0..d).map(|k| k as f64).collect::<Vec<_>>()).unwrap();
        let ms = obs.measurement_set();
        let p = outcome_distribution(&ms, &rho).unwrap().probabilities();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        prop_assert!(p.iter().all(|&x| x >= -1e-12));
        for proj in ms.operators() {
            let sq = proj.matmul(proj).unwrap();
            prop_assert!(sq.max_abs_diff(proj).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn ket_and_density_statistics_agree(seed in any::<u64>(), d in 2usize..=5) {
        let mut g = rng(seed);
        let psi = random_ket(&[d], &mut g);
        let obs = Observable::in_basis(&random_unitary(d, &mut g), &(0..d).map(|k| k as f64).collect::<Vec<_>>()).unwrap();
        let ms = obs.measurement_set();
        let from_ket = ket_probabilities(&ms, &psi).unwrap();
        let from_rho = outcome_distribution(&ms, &DensityOperator::from_ket(&psi)).unwrap().probabilities();
        for (x, y) in from_ket.iter().zip(&from_rho) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn entropy_bounded_and_unitarily_invariant(seed in any::<u64>(), d in 1usize..=6) {
        let mut g = rng(seed);
        let rho = random_density_any_rank(&[d], &mut g);
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!(s.bits >= 0.0 && s.bits <= (d as f64).log2() + 1e-10);
        prop_assert!((s.nats - s.bits * std::f64::consts::LN_2).abs() <= 1e-12);
        let u = random_unitary(d, &mut g);
        let rotated = DensityOperator::new(vec![d], u.sandwich(rho.matrix()).unwrap().hermitian_part().unwrap()).unwrap();
        prop_assert!((von_neumann_entropy(&rotated).unwrap().bits - s.bits).abs() <= 1e-9);
    }

    #[test]
    fn measuring_in_a_basis_removes_its_coherence(seed in any::<u64>(), d in 2usize..=4) {
        let mut g = rng(seed);
        let psi = random_ket(&[d], &mut g);
        let basis = random_unitary(d, &mut g);
        let before = wave_behavior(&psi, &basis, WAVE_THRESHOLD).unwrap();
        prop_assert!(before.has_wave_behavior);
        let obs = Observable::in_basis(&basis, &(0..d).map(|k| k as f64).collect::<Vec<_>>()).unwrap();
        let after = nonselective_update(&obs.measurement_set(), &DensityOperator::from_ket(&psi)).unwrap();
        prop_assert!(l1_coherence_in_basis(after.matrix(), &basis).unwrap() <= 1e-10);
    }

    #[test]
    fn erasure_is_idempotent_and_pure(seed in any::<u64>(), d in 1usize..=5) {
        let rho = random_density_any_rank(&[d], &mut rng(seed));
        let r = erasure_channel(d).unwrap();
        let once = r.apply(&rho).unwrap();
        let twice = r.apply(&once).unwrap();
        prop_assert!(once.matrix().max_abs_diff(twice.matrix()).unwrap() <= 1e-12);
        prop_assert!(von_neumann_entropy(&once).unwrap().bits <= 1e-10);
        let mut target = ComplexMatrix::zeros(d, d);
        target[(0, 0)] = Complex::new(1.0, 0.0);
        prop_assert!(once.matrix().max_abs_diff(&target).unwrap() <= 1e-12);
    }
}

#[test]
fn completeness_over_two_hundred_states() {
    let mut g = rng(4242);
    let ms = Observable::computational(4).unwrap().measurement_set();
    for _ in 0..200 {
        let rho = random_density_any_rank(&[2, 2], &mut g);
        let total: f64 = outcome_distribution(&ms, &rho)
            .unwrap()
            .probabilities()
            .iter()
            .sum();
        assert!((total - 1.0).abs() <= 1e-10);
    }
}
