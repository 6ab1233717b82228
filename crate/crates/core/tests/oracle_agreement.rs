use feigen_core::deltasolver::{solve_delta, DeltaConfig};
use feigen_core::gsolver::{alpha_from, solve_g, GSolveConfig};
use feigen_core::mpnum::PrecisionContext;
use feigen_core::oracle::{alpha_oracle, delta_oracle, superstable_params};

#[test]
fn oracle_matches_pipeline_at_n16() {
    let ctx = PrecisionContext::from_bits(256).unwrap();
    let seq = superstable_params(12, &ctx).unwrap();
    let d_oracle = delta_oracle(&seq).unwrap().value.to_f64();
    let a_oracle = alpha_oracle(&seq).unwrap().value.to_f64();

    let cfg = GSolveConfig::new(16, 42).unwrap();
    let sol = solve_g(&cfg, None).unwrap();
    let a = alpha_from(&sol.series, &sol.ctx).unwrap().to_f64();
    let d = solve_delta(&sol.series, &sol.ctx, &DeltaConfig::new(16, 42)).unwrap().delta.to_f64();

    assert!((d_oracle - d).abs() < 1e-5, "{d_oracle} vs {d}");
    assert!((a_oracle.abs() - a.abs()).abs() < 1e-4, "{a_oracle} vs {a}");
    assert!(a_oracle < 0.0 && a < 0.0);
}
