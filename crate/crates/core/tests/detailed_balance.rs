//! Long-run state frequencies of the weights move on a frozen two-weight
//! model against the posterior computed on a fine grid.

use maxstable::angular::AngularBp;
use maxstable::inference::{run_mcmc, SamplerConfig};
use maxstable::maxstable::{log_density_simple, MarginFamily, MarginSpec, ModelSpec};
use maxstable::priors::{DegreePriorConfig, PriorConfig, Priors};
use maxstable::simulation::{sample_many, SeededRng};

const BINS: usize = 4;
const TOP: f64 = 0.75;

fn bin(phi1: f64) -> usize {
    ((phi1 / TOP * BINS as f64) as usize).min(BINS - 1)
}

#[test]
fn weights_move_targets_the_posterior() {
    let truth = AngularBp::from_interior(2, 3, vec![0.3, 0.2]).unwrap();
    let model = ModelSpec::new(truth, MarginSpec::simple()).unwrap();
    let data = sample_many(&model, 15, &mut SeededRng::new(11, 0)).unwrap();

    // grid oracle: midpoint rule over the feasible triangle-like region
    let n = 600;
    let h = TOP / n as f64;
    let mut logs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let p1 = 0.5 - (a + 2.0 * b) / 3.0;
            let p2 = 0.5 - (2.0 * a + b) / 3.0;
            if p1 < 0.0 || p2 < 0.0 {
                continue;
            }
            let m = AngularBp::from_interior(2, 3, vec![a, b]).unwrap();
            let ll: f64 = data.iter().map(|y| log_density_simple(&m, y).unwrap()).sum();
            logs.push((a, ll));
        }
    }
    let top = logs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let mut exact = [0.0; BINS];
    for (a, ll) in &logs {
        exact[bin(*a)] += (ll - top).exp();
    }
    let z: f64 = exact.iter().sum();
    exact.iter_mut().for_each(|p| *p /= z);

    let cfg = PriorConfig {
        degree: DegreePriorConfig { q: 0.2, k_min: Some(3), k_cap: Some(3) },
        ..Default::default()
    };
    let priors = Priors::new(2, MarginFamily::Simple, &cfg, None).unwrap();
    let sc = SamplerConfig {
        iterations: 205_000,
        burn_in: 5_000,
        trans_prob: 0.0,
        seed: 2026,
        ..Default::default()
    };
    let chain = run_mcmc(&data, &priors, &sc).unwrap();
    let xs: Vec<usize> = chain.states.iter().map(|s| bin(s.phi[0])).collect();
    let batches = 50;
    let len = xs.len() / batches;
    for b in 0..BINS {
        let means: Vec<f64> = (0..batches)
            .map(|i| xs[i * len..(i + 1) * len].iter().filter(|&&x| x == b).count() as f64 / len as f64)
            .collect();
        let mean = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt().max(1e-4);
        assert!(
            (mean - exact[b]).abs() <= 3.0 * se,
            "bin {b}: chain {mean:.4} grid {:.4} se {se:.4}",
            exact[b]
        );
    }
}

#[test]
fn degree_moves_target_the_posterior() {
    use maxstable::priors::{degree_log_pmf, weights_sample_model};
    let truth = AngularBp::from_interior(2, 4, vec![0.3, 0.4, 0.2]).unwrap();
    let model = ModelSpec::new(truth, MarginSpec::simple()).unwrap();
    let data = sample_many(&model, 3, &mut SeededRng::new(12, 0)).unwrap();
    let cfg = PriorConfig {
        degree: DegreePriorConfig { q: 0.3, k_min: Some(3), k_cap: Some(5) },
        ..Default::default()
    };
    let priors = Priors::new(2, MarginFamily::Simple, &cfg, None).unwrap();

    // p(k | x) ∝ λ(k) E_{ν_k}[L], the expectation by prior draws
    let mut rng = SeededRng::new(99, 0);
    let ks = [3usize, 4, 5];
    let mut post: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let draws = 100_000;
            let mean = (0..draws)
                .map(|_| {
                    let m = weights_sample_model(k, 2, &mut rng).unwrap();
                    data.iter().map(|y| log_density_simple(&m, y).unwrap()).sum::<f64>().exp()
                })
                .sum::<f64>()
                / draws as f64;
            degree_log_pmf(&priors.degree, k).unwrap().exp() * mean
        })
        .collect();
    let z: f64 = post.iter().sum();
    post.iter_mut().for_each(|p| *p /= z);

    let sc = SamplerConfig {
        iterations: 205_000,
        burn_in: 5_000,
        trans_prob: 0.5,
        concentration: 20.0,
        seed: 2027,
        ..Default::default()
    };
    let chain = run_mcmc(&data, &priors, &sc).unwrap();
    let batches = 50;
    let len = chain.len() / batches;
    for (i, &k) in ks.iter().enumerate() {
        let means: Vec<f64> = (0..batches)
            .map(|b| chain.states[b * len..(b + 1) * len].iter().filter(|s| s.k == k).count() as f64 / len as f64)
            .collect();
        let mean = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt().max(1e-4);
        assert!((mean - post[i]).abs() <= 3.0 * se + 0.005, "k={k}: chain {mean:.4} exact {:.4} se {se:.4}", post[i]);
    }
}
