use stiffsde::experiments::{resolve_preset, simulate, ExperimentConfig, Formulation};
use stiffsde::transform::protein_transform;
use stiffsde::{
    build_linear_model, build_protein_model, build_transformed_protein_model, coarsen,
    empirical_order, exact_linear_solution, integrate, sample_brownian_grid, sup_error,
    LinearParams, MidpointOptions, ProteinParams, Scheme,
};

#[test]
fn brownian_terminal_variance_is_one() {
    let n = 100_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for seed in 0..n {
        let w = sample_brownian_grid(seed, 1.0, 0).unwrap().path_value(1);
        s1 += w;
        s2 += w * w;
    }
    let mean = s1 / n as f64;
    let var = s2 / n as f64 - mean * mean;
    assert!((0.98..=1.02).contains(&var), "{var}");
    assert!(mean.abs() < 0.01, "{mean}");
}

#[test]
fn pathwise_transform_equivalence_shrinks_with_step() {
    let p = ProteinParams::new(18.0, 1.0);
    let original = build_protein_model(&p).unwrap();
    let transformed = build_transformed_protein_model(&p).unwrap();
    let pair = protein_transform(18.0).unwrap();
    let opts = MidpointOptions::default();
    let fine = sample_brownian_grid(11, 1.0, 14).unwrap();
    let diffs: Vec<f64> = (10..=12)
        .map(|l| {
            let grid = coarsen(&fine, 14 - l).unwrap();
            let x = integrate(&original, Scheme::Midpoint, p.x0, &grid, grid.dt(), &opts).unwrap();
            let big = integrate(&transformed, Scheme::Midpoint, pair.forward(p.x0), &grid, grid.dt(), &opts)
                .unwrap();
            let mapped = x.map_states(|v| pair.forward(v), "mapped");
            sup_error(&mapped, &big).unwrap()
        })
        .collect();
    for w in diffs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.4..=2.6).contains(&ratio), "{diffs:?}");
    }
    assert!(diffs[2] < 1e-3, "{diffs:?}");
}

#[test]
fn transformed_series_maps_back_exactly() {
    let out = simulate(&resolve_preset("fig2b").unwrap()).unwrap();
    let pair = out.pair.unwrap();
    let s = out
        .series
        .iter()
        .find(|s| s.record.formulation == Formulation::Transformed)
        .unwrap();
    let (x, big) = (s.trajectory.as_ref().unwrap(), s.transformed.as_ref().unwrap());
    for (&xv, &bv) in x.states().iter().zip(big.states()) {
        assert!((pair.inverse(bv) - xv).abs() <= 1e-15);
    }
}

#[test]
fn midpoint_order_near_one_when_noise_dominates() {
    let p = LinearParams::new(-1.0, -1.0).with_z0(1.0);
    let model = build_linear_model(&p);
    let opts = MidpointOptions::default();
    let levels: Vec<u32> = (4..=8).collect();
    let paths = 1000;
    let mut sq = vec![0.0; levels.len()];
    for seed in 0..paths {
        let fine = sample_brownian_grid(seed, 1.0, 8).unwrap();
        let exact = exact_linear_solution(&p, &fine).final_state().unwrap();
        for (i, &l) in levels.iter().enumerate() {
            let grid = coarsen(&fine, 8 - l).unwrap();
            let end = integrate(&model, Scheme::Midpoint, p.z0, &grid, grid.dt(), &opts)
                .unwrap()
                .final_state()
                .unwrap();
            sq[i] += (end - exact).powi(2);
        }
    }
    let points: Vec<(f64, f64)> = levels
        .iter()
        .zip(&sq)
        .map(|(&l, &s)| (2f64.powi(-(l as i32)), (s / paths as f64).sqrt()))
        .collect();
    let order = empirical_order(&points).unwrap();
    assert!((0.8..=1.2).contains(&order), "{order}");
}

#[test]
fn failed_series_do_not_stop_the_run() {
    let cfg = ExperimentConfig {
        seed: 1,
        ..resolve_preset("fig2a").unwrap()
    };
    let out = simulate(&cfg).unwrap();
    let orig = out.record(Scheme::Midpoint, Formulation::Original, 0.12).unwrap();
    let trans = out.record(Scheme::Midpoint, Formulation::Transformed, 0.12).unwrap();
    assert!(orig.failed());
    assert!(!trans.failed());
    assert!(trans.sup_error.unwrap() < 0.1);
}

#[test]
fn euler_and_midpoint_agree_on_smooth_runs() {
    let mut cfg = resolve_preset("fig2b").unwrap();
    cfg.schemes = vec![Scheme::Euler, Scheme::Midpoint];
    cfg.formulations = vec![Formulation::Original];
    let out = simulate(&cfg).unwrap();
    for scheme in [Scheme::Euler, Scheme::Midpoint] {
        let r = out.record(scheme, Formulation::Original, 0.01).unwrap();
        assert!(r.sup_error.unwrap() < 0.1, "{scheme}: {:?}", r.sup_error);
    }
}
