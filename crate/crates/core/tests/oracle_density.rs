// Reference values keep every digit the oracle printed.
#![allow(clippy::excessive_precision)]

use std::sync::Arc;

use isoconf::density::{Dataset, DensityEstimator, EstimatorKind};
use isoconf::kernel::KernelSpec;

const H: [f64; 2] = [0.9, 0.7];
const L: [f64; 2] = [1.3, 1.1];
const G: [f64; 2] = [0.6, 0.8];

// point, f̂_h, f̂^bc, f̂_g ⋆ K_h; 40-digit reference values.
const REFERENCE: [([f64; 2], f64, f64, f64); 5] = [
    (
        [0.1, -0.2],
        0.043081501087186351194,
        0.042926685189980874081,
        0.075566003156565246065,
    ),
    (
        [1.0, 0.5],
        0.11660422584145846919,
        0.13190074907954412852,
        0.15730944459378626786,
    ),
    (
        [-1.2, 0.9],
        0.23368890827618514396,
        0.26787873691870272223,
        0.18068337079430672208,
    ),
    (
        [0.4, 1.3],
        0.041851692600689445062,
        0.04242416919710523741,
        0.052015297845033948684,
    ),
    (
        [2.2, -1.0],
        0.00010645167815213059642,
        -0.0038753271114843999606,
        0.0015912084354116161974,
    ),
];

fn sample() -> Arc<Dataset> {
    let rows: Vec<Vec<f64>> = (0..30)
        .map(|i| vec![(1.3 * i as f64).sin() * 1.5, (0.7 * i as f64).cos() * 1.2])
        .collect();
    Arc::new(Dataset::from_rows(&rows).unwrap())
}

fn kernel() -> KernelSpec {
    KernelSpec::simulation(2).unwrap()
}

#[test]
fn plain_estimator_matches_reference() {
    let est = DensityEstimator::plain(sample(), &kernel(), &H).unwrap();
    for (x, want, _, _) in REFERENCE {
        assert!((est.eval(&x).unwrap() - want).abs() < 1e-14, "{x:?}");
    }
}

#[test]
fn bias_corrected_matches_reference() {
    let kind = EstimatorKind::BiasCorrected { l: L.to_vec() };
    let est = DensityEstimator::fit(sample(), &kernel(), &H, kind).unwrap();
    for (x, _, want, _) in REFERENCE {
        assert!((est.eval(&x).unwrap() - want).abs() < 1e-13, "{x:?}");
    }
}

#[test]
fn bootstrap_mean_matches_reference() {
    let kind = EstimatorKind::BootstrapMean { g: G.to_vec() };
    let est = DensityEstimator::fit(sample(), &kernel(), &H, kind).unwrap();
    for (x, _, _, want) in REFERENCE {
        let got = est.eval(&x).unwrap();
        assert!((got - want).abs() < 1e-12, "{x:?}: {got} vs {want}");
    }
}

#[test]
fn gradient_and_hessian_match_differences() {
    let kind = EstimatorKind::BiasCorrected { l: L.to_vec() };
    let est = DensityEstimator::fit(sample(), &kernel(), &H, kind).unwrap();
    let step = 1e-5;
    for (x, ..) in REFERENCE.iter().take(4) {
        let g = est.eval_grad(x).unwrap();
        let hs = est.eval_hessian(x).unwrap();
        for j in 0..2 {
            let mut p = *x;
            let mut m = *x;
            p[j] += step;
            m[j] -= step;
            let fd = (est.eval(&p).unwrap() - est.eval(&m).unwrap()) / (2.0 * step);
            assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1e-3), "grad {j} at {x:?}");
            let (gp, gm) = (est.eval_grad(&p).unwrap(), est.eval_grad(&m).unwrap());
            for i in 0..2 {
                let fd = (gp[i] - gm[i]) / (2.0 * step);
                assert!(
                    (fd - hs[i][j]).abs() <= 1e-5 * hs[i][j].abs().max(1e-2),
                    "hess {i}{j} at {x:?}"
                );
            }
        }
    }
}

#[test]
fn pruned_matches_full_sum() {
    let data = sample();
    for kind in [EstimatorKind::Plain, EstimatorKind::BiasCorrected { l: L.to_vec() }] {
        let est = DensityEstimator::fit(data.clone(), &kernel(), &H, kind).unwrap();
        for k in 0..50 {
            let x = [-2.5 + 0.1 * k as f64, 1.9 - 0.08 * k as f64];
            assert!((est.eval(&x).unwrap() - est.eval_brute_force(&x).unwrap()).abs() < 1e-13);
        }
    }
}
