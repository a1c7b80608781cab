use acr::blockwise::make_blocks;
use acr::combiner::{combine_unknown_scale, regenerated_weights, InitialEstimateSet, WeightVector};
use acr::kernel::{nw_estimate, KernelSpec, RegressionSample};
use acr::quantile::{check_loss, fit_quantile, DesignData};
use acr::numerics::Matrix;
use proptest::prelude::*;

fn estimates(m: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-50.0..50.0f64, m),
        prop::collection::vec(-4.0..4.0f64, m),
        prop::collection::vec(0.1..1.0f64, m),
    )
}

proptest! {
    #[test]
    fn blocks_stay_inside_sample(n in 4usize..3000, c in 0.05..1.0f64, tau in 0.05..1.0f64) {
        if let Ok(s) = make_blocks(n, c, tau) {
            prop_assert!(s.blocks >= 2);
            prop_assert!(s.block(s.blocks - 1).end <= n);
            prop_assert!(s.block(s.blocks).end > n);
            prop_assert!(s.separation <= s.window);
        }
    }

    #[test]
    fn location_equivariance((t, xi, w) in (2usize..7).prop_flat_map(estimates), shift in -100.0..100.0f64) {
        let taus: Vec<f64> = (1..=t.len()).map(|k| k as f64).collect();
        let w = WeightVector::normalized(w).unwrap();
        let est = InitialEstimateSet::new(taus.clone(), t.clone(), xi.clone()).unwrap();
        if let Ok(base) = combine_unknown_scale(&est, &w) {
            let moved = InitialEstimateSet::new(taus, t.iter().map(|v| v + shift).collect(), xi.clone()).unwrap();
            let moved = combine_unknown_scale(&moved, &w).unwrap();
            prop_assert!((moved.theta_tilde - base.theta_tilde - shift).abs() <= 1e-9 * (1.0 + shift.abs() + base.theta_tilde.abs()));
            prop_assert!((moved.phi_hat - base.phi_hat).abs() <= 1e-9 * (1.0 + base.phi_hat.abs()));
        }
    }

    #[test]
    fn regenerated_weights_annihilate_xi((_t, xi, w) in (2usize..7).prop_flat_map(estimates)) {
        let w = WeightVector::normalized(w).unwrap();
        if let Ok(g) = regenerated_weights(&w, &xi) {
            let scale = 1.0 + g.as_slice().iter().map(|v| v.abs()).sum::<f64>() * 4.0;
            let sum: f64 = g.as_slice().iter().sum();
            let moment: f64 = g.as_slice().iter().zip(&xi).map(|(a, b)| a * b).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12 * scale);
            prop_assert!(moment.abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn nw_ignores_response_scale_and_shift(
        ys in prop::collection::vec(-5.0..5.0f64, 30),
        a in 0.1..10.0f64,
        b in -10.0..10.0f64,
        h in 0.15..0.5f64,
    ) {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 + 0.5) / 30.0).collect();
        let k = KernelSpec::epanechnikov();
        let s = RegressionSample::new(xs.clone(), ys.clone()).unwrap();
        let t = RegressionSample::new(xs, ys.iter().map(|y| a * y + b).collect()).unwrap();
        let r = nw_estimate(&s, 0.5, h, &k).unwrap();
        let rt = nw_estimate(&t, 0.5, h, &k).unwrap();
        prop_assert!((rt - (a * r + b)).abs() <= 1e-10 * (1.0 + rt.abs()));
    }

    #[test]
    fn quantile_fit_beats_perturbations(
        ys in prop::collection::vec(-3.0..3.0f64, 8..20),
        tau in 0.05..0.95f64,
        db in -0.5..0.5f64,
        dbeta in -0.5..0.5f64,
    ) {
        let n = ys.len();
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let data = DesignData::new(Matrix::from_row_major(n, 1, xs.clone()).unwrap(), ys.clone()).unwrap();
        let fit = fit_quantile(&data, tau).unwrap();
        let moved: f64 = (0..n)
            .map(|i| check_loss(ys[i] - fit.intercept - db - (fit.beta[0] + dbeta) * xs[i], tau))
            .sum();
        prop_assert!(fit.objective <= moved + 1e-9);
    }
}
