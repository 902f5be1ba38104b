//! The published model configurations through the public API.

use approx::assert_relative_eq;
use gcnet::dcmm::{build_omega, stream_rng, validate};
use gcnet::harness::experiments::{normality_alternative_model, power_model};
use gcnet::params_file::ParamsFile;
use gcnet::power::{delta_gc, SpectralSummary};

#[test]
fn alternative_omega_matches_triple_sum() {
    let mut rng = stream_rng(11, 0);
    let params = normality_alternative_model().draw(&mut rng).unwrap();
    let omega = build_omega(&params);
    // Some Pareto draws push a few probabilities above 1; compare the raw products anyway.
    let (pi, p, t) = (params.memberships(), params.community(), params.theta());
    let direct = |i: usize, j: usize| {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += pi[(i, a)] * pi[(j, b)] * p[(a, b)];
            }
        }
        t[i] * t[j] * s
    };
    match omega {
        Ok(omega) => {
            for i in 0..params.n() {
                for j in 0..params.n() {
                    assert!((omega.get(i, j) - direct(i, j)).abs() <= 1e-14);
                }
            }
        }
        Err(gcnet::GcError::ModelValidity { i, j, value }) => {
            assert!((value - direct(i, j)).abs() <= 1e-14);
            assert!(value > 1.0);
        }
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn power_model_reports_target_norm() {
    let mut rng = stream_rng(3, 0);
    let params = power_model(0.15, 0.52, 10.0).unwrap().draw(&mut rng).unwrap();
    let report = validate(&params);
    assert_relative_eq!(report.theta_norm2, 10.0, max_relative = 1e-12);
    assert_eq!(report.pure_mass_ratios.len(), 10);
    assert!(report.warnings.iter().all(|w| !w.contains("no pure node")));
    // Unequal theta moves delta3 away from its equal-theta value, but delta4 stays positive.
    assert!(delta_gc(&params, 4).unwrap() > 0.0);
}

#[test]
fn params_file_round_trip_through_spectrum() {
    let text = r#"{
        "K": 3,
        "theta_spec": {"pareto": {"shape": 4, "scale": 0.375}, "divisor": 1.4142135623730951, "seed": 5},
        "pure_blocks": [60, 60, 60],
        "mixed": [[0.3333333333333333, 0.3333333333333333, 0.3333333333333333]],
        "P": [[1, 0.3333333333333333, 0.3333333333333333],
              [0.3333333333333333, 1, 0.3333333333333333],
              [0.3333333333333333, 0.3333333333333333, 1]]
    }"#;
    let params = ParamsFile::from_json(text).unwrap().resolve().unwrap();
    assert_eq!(params.n(), 181);
    let spectrum = SpectralSummary::new(&params).unwrap();
    assert!(spectrum.lambdas[0] > 0.0);
    assert!(spectrum.delta_gc(4).unwrap() > 0.0);
    let json = serde_json::to_string(&spectrum).unwrap();
    assert!(json.contains("\"lambdas\""));
}
