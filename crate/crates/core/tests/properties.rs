//! Randomised invariants across the library.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use starnet_core::benchmarks::{squashed_bound_w3, StarChannel};
use starnet_core::fock::{enumerate_detection_patterns, enumerate_single_occupancy};
use starnet_core::gaussian::{
    click_probability, gaussian_loss, gaussian_unitary, no_click_probability, star_network_state, tmsv, w_fidelity,
};
use starnet_core::linear_optics::{apply_interferometer, output_distribution, permanent, permanent_repeated};
use starnet_core::protocol::{herald_probability_exact, simulate_station, SHARED};
use starnet_core::{
    dicke_state, DetectorModel, DickeSpec, InterferometerMatrix, LossChannel, OccupationVector, ProtocolParams,
    PureFockState, SqueezingSpec,
};

/// Sum over all permutations.
fn naive_permanent(m: &DMatrix<Complex64>) -> Complex64 {
    fn rec(m: &DMatrix<Complex64>, row: usize, used: &mut Vec<bool>) -> Complex64 {
        if row == m.nrows() {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..m.ncols() {
            if !used[col] {
                used[col] = true;
                acc += m[(row, col)] * rec(m, row + 1, used);
                used[col] = false;
            }
        }
        acc
    }
    rec(m, 0, &mut vec![false; m.ncols()])
}

/// Unitary from the QR factor of a seeded complex matrix.
fn random_unitary(n: usize, entries: &[(f64, f64)]) -> InterferometerMatrix {
    let m = DMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        Complex64::new(re, im)
    });
    InterferometerMatrix::new(m.qr().q()).expect("QR factor is unitary")
}

fn complex_entries(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ryser_matches_permutation_sum(n in 1usize..=6, entries in complex_entries(36)) {
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(entries[i * n + j].0, entries[i * n + j].1));
        let diff = (permanent(&m) - naive_permanent(&m)).norm();
        prop_assert!(diff < 1e-11, "diff {diff}");
    }

    #[test]
    fn repeated_permanent_matches_naive(
        entries in complex_entries(9),
        rows in prop::collection::vec(0u32..3, 3),
        shuffle in 0usize..6,
    ) {
        let m = DMatrix::from_fn(3, 3, |i, j| Complex64::new(entries[i * 3 + j].0, entries[i * 3 + j].1));
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let cols: Vec<u32> = perms[shuffle].iter().map(|&i| rows[i]).collect();
        let ri: Vec<usize> = rows.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
        let ci: Vec<usize> = cols.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
        let expanded = DMatrix::from_fn(ri.len(), ci.len(), |a, b| m[(ri[a], ci[b])]);
        let diff = (permanent_repeated(&m, &rows, &cols) - naive_permanent(&expanded)).norm();
        prop_assert!(diff < 1e-10, "diff {diff}");
    }

    #[test]
    fn interferometers_preserve_norm_and_photon_number(
        n in 2usize..=4,
        entries in complex_entries(16),
        counts in prop::collection::vec(0u32..3, 4),
    ) {
        let u = random_unitary(n, &entries);
        let input = OccupationVector::new(counts[..n].to_vec());
        let dist = output_distribution(&u, &input).unwrap();
        let total: f64 = dist.iter().map(|(_, a)| a.norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() < 1e-11, "total {total}");
        prop_assert!(dist.iter().all(|(o, _)| o.total() == input.total()));

        let state = PureFockState::from_terms(&[("X", n)], [(input.clone(), Complex64::new(1.0, 0.0))]).unwrap();
        let out = apply_interferometer(&u, &state, "X").unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn herald_probabilities_are_a_distribution(
        n in prop::sample::select(vec![2usize, 3, 4]),
        b in 0.01f64..0.99,
        t in 0.0f64..=1.0,
    ) {
        let d = n.next_power_of_two();
        let mut total = 0.0;
        for m in 0..=n {
            let params = ProtocolParams::new(n, m, b, LossChannel::new(t).unwrap()).unwrap();
            for pattern in enumerate_detection_patterns(d, m as u32) {
                let p = herald_probability_exact(&params, &pattern).unwrap();
                prop_assert!(p >= -1e-15);
                total += p;
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12, "total {total}");
    }

    #[test]
    fn closed_form_matches_simulation(
        n in prop::sample::select(vec![2usize, 3, 4]),
        m in 1usize..=2,
        b in 0.01f64..0.99,
        t in 0.0f64..=1.0,
    ) {
        let params = ProtocolParams::new(n, m, b, LossChannel::new(t).unwrap()).unwrap();
        let station = simulate_station(&params).unwrap();
        for pattern in enumerate_detection_patterns(params.n_detectors(), m as u32) {
            let simulated = station.outcome_probability(SHARED, &pattern).unwrap();
            let closed = herald_probability_exact(&params, &pattern).unwrap();
            prop_assert!((simulated - closed).abs() < 1e-13, "{pattern}: {simulated} vs {closed}");
        }
    }

    #[test]
    fn dicke_states_are_normalised(n in 1usize..=8, k_frac in 0.0f64..=1.0) {
        let k = ((n as f64) * k_frac).round() as usize;
        let psi = dicke_state(&DickeSpec::new(n, k).unwrap());
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-13);
        prop_assert_eq!(psi.len(), enumerate_single_occupancy(n, k).unwrap().len());
    }

    #[test]
    fn gaussian_operations_stay_physical(r in 0.0f64..1.0, t in 0.0f64..=1.0, entries in complex_entries(4)) {
        let s = tmsv(SqueezingSpec::from_r(r).unwrap());
        let lossy = gaussian_loss(&s, 1, t).unwrap();
        prop_assert!(lossy.is_physical());
        let u = random_unitary(2, &entries);
        let both = gaussian_loss(&lossy, 0, 0.5).unwrap();
        let state = starnet_core::GaussianState::from_covariance(&[("X", 2)], both.covariance().clone()).unwrap();
        let mixed = gaussian_unitary(&state, &u, "X").unwrap();
        prop_assert!(mixed.is_physical());
        let p0 = no_click_probability(&mixed, 0, &DetectorModel::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&p0));
    }

    #[test]
    fn squeezing_round_trips(r in 0.0f64..3.0) {
        let s = SqueezingSpec::from_r(r).unwrap();
        prop_assert!((SqueezingSpec::from_db(s.db()).unwrap().r() - r).abs() < 1e-12);
        if s.lambda() < 1.0 - 1e-12 {
            prop_assert!((SqueezingSpec::from_lambda(s.lambda()).unwrap().r() - r).abs() < 1e-9 * (1.0 + r));
        }
    }

    #[test]
    fn squashed_bound_is_a_rate(eta in 0.0f64..=1.0) {
        let v = squashed_bound_w3(eta).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        let direct = starnet_core::benchmarks::direct_rate(3, &StarChannel::new(eta, 3).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&direct));
    }
}

#[test]
fn fidelity_does_not_increase_with_dark_counts() {
    for n in [2usize, 3, 4] {
        for d in [0.0, 40.0, 120.0] {
            let state = star_network_state(n, SqueezingSpec::from_db(1.3).unwrap(), &LossChannel::from_fiber(d, 0.2).unwrap()).unwrap();
            let mut last = f64::INFINITY;
            for p_dc in [0.0, 1e-9, 1e-7, 1e-5, 1e-3, 1e-1] {
                let f = w_fidelity(&state, n, &DetectorModel::new(p_dc, 0.8).unwrap(), n).unwrap();
                assert!(f <= last + 1e-12, "N={n} d={d} p_dc={p_dc}: {f} > {last}");
                last = f;
            }
        }
    }
}

#[test]
fn click_probability_falls_with_distance() {
    let sq = SqueezingSpec::from_db(2.17).unwrap();
    for n in [2usize, 3, 4] {
        let mut last = f64::INFINITY;
        for step in 0..=60 {
            let state = star_network_state(n, sq, &LossChannel::from_fiber(5.0 * step as f64, 0.2).unwrap()).unwrap();
            let ideal = click_probability(&state, n, &DetectorModel::new(0.0, 0.8).unwrap()).unwrap();
            assert!(ideal < last, "N={n} step={step}");
            last = ideal;
            let noisy = click_probability(&state, n, &DetectorModel::default()).unwrap();
            assert!(noisy >= 1e-7);
        }
    }
}
