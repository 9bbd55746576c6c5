use infobench::bayes::{
    log_likelihood, model_posterior, perturb_forcing, sample_abc, sample_parameters,
    LikelihoodSpec, ModelProbabilityTable, ModelRuns, PerturbationSpec,
};
use infobench::seed;
use infobench::{Forcing, ModelKind, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

#[test]
fn nash_draws_cover_the_unit_cube() {
    let draws = sample_parameters(ModelKind::Nash, 500, 1).unwrap();
    assert_eq!(draws.len(), 500);
    for d in &draws {
        let ModelParams::Nash(p) = d else {
            panic!("not nash")
        };
        assert!(p.k.iter().all(|k| (0.0..=1.0).contains(k)));
    }
    assert_eq!(draws, sample_parameters(ModelKind::Nash, 500, 1).unwrap());
    assert_ne!(draws, sample_parameters(ModelKind::Nash, 500, 2).unwrap());
}

#[test]
fn abc_rejection_accepts_half_of_proposals() {
    let mut rng = seed::rng(3);
    let n = 20_000;
    let proposals: usize = (0..n).map(|_| sample_abc(&mut rng).1).sum();
    let rate = n as f64 / proposals as f64;
    assert!((rate - 0.5).abs() < 0.01, "{rate}");
}

fn wet_dry_forcing() -> Forcing {
    let precip = (0..200)
        .map(|t| if t % 3 == 0 { 12.0 } else { 0.0 })
        .collect();
    Forcing::new(precip, vec![2.0; 200]).unwrap()
}

#[test]
fn vanishing_noise_keeps_forcing() {
    let f = wet_dry_forcing();
    for copy in perturb_forcing(&f, &PerturbationSpec::new(1e-12, 5).unwrap(), 4).unwrap() {
        assert!(copy
            .precip()
            .iter()
            .zip(f.precip())
            .all(|(a, b)| (a - b).abs() < 1e-9));
        assert_eq!(copy.pet(), f.pet());
    }
}

#[test]
fn perturbed_means_follow_the_clt_and_dry_days_are_biased() {
    let f = wet_dry_forcing();
    let sigma = 0.5;
    let copies = perturb_forcing(&f, &PerturbationSpec::new(sigma, 500).unwrap(), 5).unwrap();
    let mean = |day: usize| copies.iter().map(|c| c.precip()[day]).sum::<f64>() / 500.0;
    let bound = 3.0 * sigma / 500f64.sqrt();
    for wet in (0..200).step_by(3) {
        assert!((mean(wet) - 12.0).abs() < bound, "day {wet}");
    }
    // Clipped half-normal: E = sigma / sqrt(2 pi).
    let dry = mean(1);
    assert!(dry > 0.0);
    assert!(
        (dry - sigma / (2.0 * std::f64::consts::PI).sqrt()).abs() < 0.05,
        "{dry}"
    );
}

#[test]
fn log_likelihood_examples() {
    let obs: Vec<f64> = (0..30).map(|t| f64::from(t) * 0.3).collect();
    let s = 0.7;
    let ll = log_likelihood(&obs, &obs, &LikelihoodSpec::new(s).unwrap()).unwrap();
    assert!((ll - 30.0 * -(s.ln() + LN_SQRT_2PI)).abs() < 1e-9);

    let one = log_likelihood(&[1.0], &[1.0 + s], &LikelihoodSpec::new(s).unwrap()).unwrap();
    assert!((one - (-(s.ln() + LN_SQRT_2PI) - 0.5)).abs() < 1e-12);

    let doubled = log_likelihood(&obs, &obs, &LikelihoodSpec::new(2.0 * s).unwrap()).unwrap();
    assert!((ll - doubled - 30.0 * std::f64::consts::LN_2).abs() < 1e-9);

    assert!(log_likelihood(&obs, &obs[1..], &LikelihoodSpec::new(s).unwrap()).is_err());
}

#[test]
fn log_space_is_safe_for_long_records_at_small_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let obs: Vec<f64> = (0..500).map(|_| rng.random_range(0.0..5.0)).collect();
    let sims: Vec<Vec<f64>> = (0..20)
        .map(|_| {
            obs.iter()
                .map(|o| o + rng.random_range(-0.5..0.5))
                .collect()
        })
        .collect();
    let runs = [
        ModelRuns {
            model: ModelKind::Nash,
            simulations: sims[..10].to_vec(),
        },
        ModelRuns {
            model: ModelKind::Abc,
            simulations: sims[10..].to_vec(),
        },
    ];
    let cell = model_posterior(&runs, &obs, &LikelihoodSpec::new(0.01).unwrap(), 10, 7).unwrap();
    assert!(!cell.degenerate);
    for r in &cell.replicates {
        assert!(r.iter().all(|p| p.is_finite()));
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn identical_runs_split_evenly() {
    let obs = vec![1.0, 2.0, 3.0, 2.0];
    let sims = vec![vec![1.1, 2.0, 2.9, 2.0], vec![0.0, 0.0, 0.0, 0.0]];
    let runs = [
        ModelRuns {
            model: ModelKind::Nash,
            simulations: sims.clone(),
        },
        ModelRuns {
            model: ModelKind::Abc,
            simulations: sims,
        },
    ];
    let cell = model_posterior(&runs, &obs, &LikelihoodSpec::new(0.3).unwrap(), 10, 8).unwrap();
    assert_eq!(cell.mean, vec![0.5, 0.5]);
    assert_eq!(cell.std, vec![0.0, 0.0]);
}

#[test]
fn exact_model_wins_against_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let obs: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..3.0)).collect();
    let noise: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..100).map(|_| rng.random_range(0.0..3.0)).collect())
        .collect();
    let runs = [
        ModelRuns {
            model: ModelKind::Nash,
            simulations: vec![obs.clone()],
        },
        ModelRuns {
            model: ModelKind::Abc,
            simulations: noise,
        },
    ];
    let cell = model_posterior(&runs, &obs, &LikelihoodSpec::new(0.05).unwrap(), 10, 10).unwrap();
    assert!(cell.mean[0] > 1.0 - 1e-12);
}

#[test]
fn bootstrap_is_deterministic_and_table_rows_follow_the_grid() {
    let obs = vec![1.0, 2.0, 0.5, 4.0, 3.0];
    let runs = [
        ModelRuns {
            model: ModelKind::Nash,
            simulations: vec![vec![1.0, 2.5, 0.0, 4.0, 3.0]],
        },
        ModelRuns {
            model: ModelKind::Abc,
            simulations: vec![vec![1.5, 2.0, 0.5, 3.0, 3.0]],
        },
    ];
    let spec = LikelihoodSpec::new(0.5).unwrap();
    let a = model_posterior(&runs, &obs, &spec, 10, 11).unwrap();
    let b = model_posterior(&runs, &obs, &spec, 10, 11).unwrap();
    assert_eq!(a, b);

    let mut table = ModelProbabilityTable::default();
    table.push_cell(0.1, 0.5, &a);
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.rows[0].model, ModelKind::Nash);
    assert!((table.rows[0].prob_mean + table.rows[1].prob_mean - 1.0).abs() < 1e-12);
}
