//! Law-of-large-numbers checks on the signal model and the raw estimators.

mod common;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use proptest::prelude::*;

use common::{block, seeded_channel, Moments};
use wlsubspace::ambiguity::make_pilots;
use wlsubspace::ambiguity::Scenario;
use wlsubspace::analysis::{theory_mse, Estimator, TheoryQuery, TheoryVariant};
use wlsubspace::channel::{
    draw_channel, draw_symbols, from_real, sigma2_from_snr_db, to_real, true_covariance, true_real_covariance, CVector,
    ChannelRealization,
};
use wlsubspace::estimators::{
    conventional_estimate, principal_eigenvector, sample_covariance, wl_estimate, Covariance, Domain,
};
use wlsubspace::rng::{Purpose, SeedTree};

#[test]
fn channel_power_and_decorrelation() {
    let tree = SeedTree::new(11);
    let mut rng = tree.stream(0, 0, Purpose::Channel);
    let (antennas, gamma2, draws) = (3, 2.0, 100_000);
    let mut power = vec![Moments::default(); antennas];
    let mut cross_re = Moments::default();
    let mut cross_im = Moments::default();
    for _ in 0..draws {
        let ch = draw_channel(antennas, gamma2, &mut rng).unwrap();
        let g = ch.g();
        for (m, z) in power.iter_mut().zip(g.iter()) {
            m.push(z.norm_sqr());
        }
        let c = g[0] * g[1].conj();
        cross_re.push(c.re);
        cross_im.push(c.im);
    }
    for m in &power {
        assert!((m.mean() - gamma2).abs() <= 0.02 * gamma2, "{}", m.mean());
    }
    assert!(cross_re.mean().abs() <= 3.0 * cross_re.std_error());
    assert!(cross_im.mean().abs() <= 3.0 * cross_im.std_error());
}

#[test]
fn symbols_are_equiprobable() {
    let mut rng = SeedTree::new(12).stream(0, 0, Purpose::Symbols);
    let symbols = draw_symbols(100_000, &mut rng);
    let plus = symbols.iter().filter(|&&b| b == 1).count() as f64 / symbols.len() as f64;
    assert!((plus - 0.5).abs() <= 0.005, "{plus}");
    assert!(symbols.iter().all(|&b| b == 1 || b == -1));
}

#[test]
fn sample_covariance_converges() {
    let ch = seeded_channel(13, 4);
    let sigma2 = 0.1;
    let b = block(&ch, 100_000, sigma2, 13, 0);
    let Covariance::Complex(r_hat) = sample_covariance(&b, Domain::Complex).unwrap() else {
        unreachable!()
    };
    let r = true_covariance(&ch, sigma2);
    assert!((&r_hat - &r).norm() / r.norm() <= 0.02);
    let Covariance::Real(rr_hat) = sample_covariance(&b, Domain::Real).unwrap() else {
        unreachable!()
    };
    let rr = true_real_covariance(&ch, sigma2);
    assert!((&rr_hat - &rr).norm() / rr.norm() <= 0.02);
}

#[test]
fn pilot_noise_averages_down() {
    let ch = seeded_channel(14, 2);
    let (sigma2, draws) = (0.8, 100_000);
    for k in [1u32, 4] {
        let mut rng = SeedTree::new(14).stream(0, u64::from(k), Purpose::Pilots);
        let mut var = vec![Moments::default(); 2];
        for _ in 0..draws {
            let p = make_pilots(&ch, k, sigma2, &mut rng).unwrap();
            for (m, (z, g)) in var.iter_mut().zip(p.averaged().iter().zip(ch.g().iter())) {
                m.push((z - g).norm_sqr());
            }
        }
        let target = sigma2 / f64::from(k);
        for m in &var {
            assert!((m.mean() - target).abs() <= 0.03 * target, "K = {k}: {}", m.mean());
        }
    }
    let a = make_pilots(&ch, 3, sigma2, &mut SeedTree::new(1).stream(0, 0, Purpose::Pilots)).unwrap();
    let b = make_pilots(&ch, 3, sigma2, &mut SeedTree::new(1).stream(0, 0, Purpose::Pilots)).unwrap();
    assert_eq!(a, b);
}

/// Theorem-style check on a fixed channel: `(J-1)c` for the conventional
/// estimate and `(2J-1)c_r` for the WL estimate, both within 5%.
#[test]
fn optimal_mse_matches_closed_forms() {
    let ch = seeded_channel(15, 5);
    let (samples, sigma2, blocks) = (100, sigma2_from_snr_db(10.0), 10_000);
    let mut conv = Moments::default();
    let mut wl = Moments::default();
    for i in 0..blocks {
        let b = block(&ch, samples, sigma2, 15, i);
        let u = conventional_estimate(&b).unwrap();
        let u = u.vector.as_complex().unwrap();
        let inner = u.dotc(ch.h()).norm();
        conv.push(2.0 - 2.0 * inner);
        let ub = wl_estimate(&b).unwrap();
        let inner = ub.vector.as_real().unwrap().dot(ch.h_bar()).abs();
        wl.push(2.0 - 2.0 * inner);
    }
    for (m, estimator) in [(conv, Estimator::Conventional), (wl, Estimator::Wl)] {
        let q = TheoryQuery::for_channel(estimator, Scenario::Optimal, &ch, samples, sigma2);
        let theory = theory_mse(&q, TheoryVariant::Exact).unwrap();
        assert!(
            (m.mean() - theory).abs() <= 0.05 * theory,
            "{estimator:?}: {} vs {theory}",
            m.mean()
        );
    }
}

#[test]
fn estimates_satisfy_solver_contract() {
    let ch = seeded_channel(16, 5);
    for (i, snr) in [0.0, 5.0, 10.0, 20.0].into_iter().enumerate() {
        for n in [5, 100] {
            let b = block(&ch, n, sigma2_from_snr_db(snr), 16, i as u64);
            for (raw, m) in [
                (
                    conventional_estimate(&b).unwrap(),
                    sample_covariance(&b, Domain::Complex).unwrap(),
                ),
                (wl_estimate(&b).unwrap(), sample_covariance(&b, Domain::Real).unwrap()),
            ] {
                assert!((raw.vector.norm() - 1.0).abs() <= 1e-10);
                assert!(raw.residual <= 1e-8 * raw.eigenvalue);
                let ritz_max = match &m {
                    Covariance::Complex(c) => SymmetricEigen::new(c.clone()).eigenvalues.max(),
                    Covariance::Real(r) => SymmetricEigen::new(r.clone()).eigenvalues.max(),
                };
                assert!((raw.eigenvalue - ritz_max).abs() <= 1e-10 * ritz_max);
            }
            let u = conventional_estimate(&b).unwrap();
            let ub = wl_estimate(&b).unwrap();
            let a = u.vector.as_complex().unwrap().dotc(ch.h()).norm();
            let c = ub.vector.as_real().unwrap().dot(ch.h_bar()).abs();
            assert!((0.0..=1.0 + 1e-12).contains(&a) && (0.0..=1.0 + 1e-12).contains(&c));
        }
    }
    let b1 = block(&ch, 50, 0.1, 99, 0);
    let b2 = block(&ch, 50, 0.1, 99, 0);
    assert_eq!(conventional_estimate(&b1).unwrap(), conventional_estimate(&b2).unwrap());
}

fn complex_vec(parts: &[(f64, f64)]) -> CVector {
    CVector::from_iterator(parts.len(), parts.iter().map(|&(re, im)| Complex64::new(re, im)))
}

proptest! {
    #[test]
    fn real_view_is_an_isometry(parts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..9)) {
        let v = complex_vec(&parts);
        let r = to_real(&v);
        prop_assert!((r.norm() - v.norm()).abs() <= 1e-12 * v.norm().max(1.0));
        prop_assert_eq!(from_real(&r).unwrap(), v);
    }

    #[test]
    fn real_covariance_principal_direction_is_h_bar(
        parts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..7),
        sigma2 in 0.01f64..2.0,
    ) {
        let g = complex_vec(&parts);
        prop_assume!(g.norm() > 1e-3);
        let ch = ChannelRealization::new(g, 1.0).unwrap();
        let raw = principal_eigenvector(&Covariance::Real(true_real_covariance(&ch, sigma2))).unwrap();
        prop_assert!((raw.vector.as_real().unwrap().dot(ch.h_bar()).abs() - 1.0).abs() <= 1e-10);
        prop_assert!((raw.eigenvalue - (ch.g_norm2() + sigma2 / 2.0)).abs() <= 1e-10 * raw.eigenvalue);
    }

    #[test]
    fn sample_covariances_are_self_adjoint_psd(seed in 0u64..1_000, antennas in 1usize..6, n in 1usize..20) {
        let ch = seeded_channel(seed, antennas);
        let b = block(&ch, n, 0.3, seed, 0);
        let Covariance::Complex(c) = sample_covariance(&b, Domain::Complex).unwrap() else { unreachable!() };
        prop_assert!((&c - c.adjoint()).norm() <= 1e-14 * c.norm());
        prop_assert!(SymmetricEigen::new(c.clone()).eigenvalues.min() >= -1e-12 * c.norm());
        let Covariance::Real(r) = sample_covariance(&b, Domain::Real).unwrap() else { unreachable!() };
        prop_assert!((&r - r.transpose()).norm() <= 1e-14 * r.norm());
        prop_assert!(SymmetricEigen::new(r.clone()).eigenvalues.min() >= -1e-12 * r.norm());
    }
}
