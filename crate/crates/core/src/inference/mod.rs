//! Trans-dimensional Metropolis-within-Gibbs sampling of the posterior over
//! the degree, the interior weights and the margin parameters, with
//! predictive densities and posterior summaries.

mod sampler;
mod state;
mod summary;

pub use sampler::{acceptance_rates, run_chains, run_mcmc, Sampler, SamplerConfig, MAX_INIT_ATTEMPTS};
pub use state::{Acceptance, Chain, ChainState, MoveStats, ProposalScales, StateRecord};
pub use summary::{
    posterior_mean_angular, posterior_summary, predictive_density, quantile_sorted, Band, ParamQuantiles,
    PosteriorSummary, Predictive, SummaryGrid,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::AngularBp;
    use crate::maxstable::{log_likelihood, MarginFamily, MarginSpec, ModelSpec};
    use crate::priors::{PriorConfig, Priors};
    use crate::simulation::{sample_many, SeededRng};

    fn data(n: usize, margins: MarginSpec<f64>, seed: u64) -> Vec<Vec<f64>> {
        let h = AngularBp::from_interior(2, 4, vec![0.3, 0.4, 0.2]).unwrap();
        let m = ModelSpec::new(h, margins).unwrap();
        sample_many(&m, n, &mut SeededRng::new(seed, 0)).unwrap()
    }

    fn priors(family: MarginFamily, k_cap: usize) -> Priors {
        let mut c = PriorConfig::default();
        c.degree.k_cap = Some(k_cap);
        Priors::new(2, family, &c, None).unwrap()
    }

    fn cfg(iterations: usize, burn_in: usize) -> SamplerConfig {
        SamplerConfig { iterations, burn_in, trans_prob: 0.5, seed: 7, ..Default::default() }
    }

    #[test]
    fn zero_iterations_return_initial_state() {
        let x = data(30, MarginSpec::simple(), 1);
        let p = priors(MarginFamily::Simple, 8);
        let c = run_mcmc(&x, &p, &cfg(0, 0)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.states[0].k, 3);
        assert_eq!(c.states[0].phi, vec![0.25, 0.25]);
    }

    #[test]
    fn identical_seeds_identical_chains() {
        let x = data(40, MarginSpec::frechet(vec![2.0, 1.0], vec![1.0, 1.0]), 2);
        let p = priors(MarginFamily::Frechet, 8);
        let a = run_mcmc(&x, &p, &cfg(300, 100)).unwrap();
        let b = run_mcmc(&x, &p, &cfg(300, 100)).unwrap();
        assert_eq!(a, b);
        let c = run_mcmc(&x, &p, &SamplerConfig { seed: 8, ..cfg(300, 100) }).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn retained_states_feasible_and_cached() {
        let x = data(40, MarginSpec::gumbel(vec![1.0, 2.0], vec![0.0, 1.0]), 3);
        let p = priors(MarginFamily::Gumbel, 9);
        let c = run_mcmc(&x, &p, &cfg(600, 200)).unwrap();
        assert_eq!(c.len(), 400);
        assert!(c.acceptance.up.proposed + c.acceptance.down.proposed > 0);
        for s in c.states.iter().step_by(4) {
            let m = s.model(2).unwrap();
            assert!(m.angular.validate().passed());
            m.margins.validate(2).unwrap();
            let ll = log_likelihood(&m, &x).unwrap().value;
            assert!((ll - s.loglik).abs() < 1e-9 * ll.abs().max(1.0), "{ll} {}", s.loglik);
        }
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let x = data(30, MarginSpec::frechet(vec![1.0, 1.0], vec![1.0, 1.0]), 4);
        let p = priors(MarginFamily::Frechet, 8);
        let full = cfg(250, 50);
        let mut lines = Vec::new();
        let whole = Sampler::new(&x, &p, full, 0)
            .unwrap()
            .run(|r| {
                lines.push(r.to_json_line());
                Ok(())
            })
            .unwrap();
        let cut = StateRecord::from_json_line(&lines[99]).unwrap();
        let rest = Sampler::resume(&x, &p, full, &cut).unwrap().run(|_| Ok(())).unwrap();
        assert_eq!(rest.states[..], whole.states[100..]);
        assert_eq!(rest.acceptance, whole.acceptance);
    }

    #[test]
    fn burn_in_must_be_shorter() {
        let x = data(10, MarginSpec::simple(), 5);
        let p = priors(MarginFamily::Simple, 6);
        assert!(matches!(run_mcmc(&x, &p, &cfg(10, 10)), Err(crate::Error::Config(_))));
    }

    #[test]
    fn data_outside_support_fails_initialization() {
        let x = vec![vec![-1.0, 2.0]; 5];
        let p = priors(MarginFamily::Simple, 6);
        assert!(matches!(run_mcmc(&x, &p, &cfg(10, 0)), Err(crate::Error::Infeasible(_))));
    }

    #[test]
    fn summaries_of_identical_states() {
        let x = data(20, MarginSpec::simple(), 6);
        let p = priors(MarginFamily::Simple, 6);
        let mut c = run_mcmc(&x, &p, &cfg(0, 0)).unwrap();
        c.states = vec![c.states[0].clone(); 5];
        let s = posterior_summary(&c, &SummaryGrid::default_for(2)).unwrap();
        assert_eq!(s.pickands.lower, s.pickands.upper);
        assert_eq!(s.angular_density.lower, s.angular_density.upper);
        assert!((s.degree_pmf.values().sum::<f64>() - 1.0).abs() < 1e-15);
        let single = predictive_density(&Chain { states: vec![c.states[0].clone()], ..c.clone() }, &[1.0, 2.0]).unwrap();
        let dup = predictive_density(&c, &[1.0, 2.0]).unwrap();
        assert!((single - dup).abs() < 1e-15 * single);
        let direct = crate::maxstable::log_density(&c.states[0].model(2).unwrap(), &[1.0, 2.0]).unwrap().exp();
        assert!((single - direct).abs() < 1e-14 * direct);
    }

    #[test]
    fn mean_pickands_within_bounds() {
        let x = data(40, MarginSpec::simple(), 7);
        let p = priors(MarginFamily::Simple, 8);
        let c = run_mcmc(&x, &p, &cfg(400, 100)).unwrap();
        let s = posterior_summary(&c, &SummaryGrid::default_for(2)).unwrap();
        for (t, a) in s.grid.points.iter().zip(&s.pickands.mean) {
            assert!(*a <= 1.0 + 1e-12 && *a >= t[0].max(1.0 - t[0]) - 1e-12);
        }
        let h = posterior_mean_angular(&c).unwrap();
        assert!(h.validate().passed());
    }
}
