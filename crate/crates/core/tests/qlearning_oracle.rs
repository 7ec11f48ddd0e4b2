use cellflow_core::env::{NUM_ACTIONS, NUM_STATES};
use cellflow_core::mdp::DeterministicMdp;
use cellflow_core::qlearning::epsilon;
use cellflow_core::{greedy_policy, train, Action, EnvConfig, EnvError, Environment, Hyperparams, SwimmerEnv, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exhaustive value iteration; returns optimal Q and the greedy policy
/// together with the gap between best and second-best action values.
fn value_iteration(mdp: &DeterministicMdp<f64>, gamma: f64) -> (Vec<[f64; NUM_ACTIONS]>, Vec<usize>, f64) {
    let n = mdp.num_states();
    let mut v = vec![0.0; n];
    let mut q = vec![[0.0; NUM_ACTIONS]; n];
    for _ in 0..5000 {
        for s in 0..n {
            for a in 0..NUM_ACTIONS {
                let s2 = mdp.next[s][a];
                let cont = if mdp.absorbing[s2] { 0.0 } else { gamma * v[s2] };
                q[s][a] = mdp.reward[s][a] + cont;
            }
        }
        for s in 0..n {
            v[s] = q[s].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
    }
    let mut policy = Vec::new();
    let mut gap = f64::INFINITY;
    for s in 0..n {
        if mdp.absorbing[s] {
            policy.push(0);
            continue;
        }
        let mut order: Vec<usize> = (0..NUM_ACTIONS).collect();
        order.sort_by(|&a, &b| q[s][b].partial_cmp(&q[s][a]).unwrap().then(a.cmp(&b)));
        policy.push(order[0]);
        gap = gap.min(q[s][order[0]] - q[s][order[1]]);
    }
    (q, policy, gap)
}

fn chain_hyperparams(episodes: usize) -> Hyperparams<f64> {
    Hyperparams {
        episodes,
        eps_decay_episodes: episodes * 7 / 10,
        ..Hyperparams::default()
    }
}

#[test]
fn two_state_chain_converges_to_bellman_value() {
    let mut mdp = DeterministicMdp::<f64>::two_state_chain(50);
    let h = chain_hyperparams(500);
    let out = train(&mut mdp, &h, 11).unwrap();
    let q11 = out.table.get(1, Action::Right);
    assert!((q11 - 10.0).abs() <= 1e-3, "Q(s1, a0) = {q11}");

    let (q_star, policy, _) = value_iteration(&mdp, 0.9);
    assert!((q_star[1][0] - 10.0).abs() < 1e-9);
    assert!((q_star[0][0] - 9.0).abs() < 1e-9);
    let greedy = greedy_policy(&out.table);
    for s in 0..2 {
        assert_eq!(greedy.act(s).index(), policy[s], "state {s}");
    }
}

/// Random deterministic MDP with a clear optimal action in every state.
fn random_mdp(seed: u64) -> DeterministicMdp<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(2..=NUM_STATES);
        let next: Vec<[usize; 4]> = (0..n).map(|_| std::array::from_fn(|_| rng.gen_range(0..n))).collect();
        let reward: Vec<[f64; 4]> = (0..n).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();
        let mdp = DeterministicMdp::new(next, reward, None, 30).unwrap();
        if value_iteration(&mdp, 0.9).2 > 0.05 {
            return mdp;
        }
    }
}

#[test]
fn greedy_policy_matches_value_iteration_on_random_chains() {
    for seed in 0..6 {
        let mut mdp = random_mdp(seed);
        let (_, policy, _) = value_iteration(&mdp, 0.9);
        let out = train(&mut mdp, &chain_hyperparams(2000), seed).unwrap();
        let greedy = greedy_policy(&out.table);
        for s in 0..mdp.num_states() {
            assert_eq!(greedy.act(s).index(), policy[s], "mdp {seed}, state {s}");
        }
    }
}

#[test]
fn absorbing_chain_matches_value_iteration() {
    // 0 -> 1 -> ... -> 5 (absorbing, pays 1 on entry); other actions stay put
    let n = 6;
    let next: Vec<[usize; 4]> = (0..n).map(|s| [(s + 1).min(n - 1), s, s, s]).collect();
    let reward: Vec<[f64; 4]> = (0..n).map(|s| [if s == n - 2 { 1.0 } else { 0.0 }, 0.0, 0.0, 0.0]).collect();
    let mut mdp = DeterministicMdp::new(next, reward, None, 20).unwrap().with_absorbing(n - 1);
    let (q_star, policy, _) = value_iteration(&mdp, 0.9);
    let out = train(&mut mdp, &chain_hyperparams(1000), 5).unwrap();
    let greedy = greedy_policy(&out.table);
    for s in 0..n - 1 {
        assert_eq!(greedy.act(s).index(), policy[s]);
        assert!((out.table.values[s][0] - q_star[s][0]).abs() < 1e-3, "state {s}");
    }
}

#[test]
fn training_is_deterministic_given_seed() {
    let config = EnvConfig { episode_steps: 100, ..EnvConfig::<f64>::default() };
    let h = chain_hyperparams(20);
    let a = train(&mut SwimmerEnv::new(config).unwrap(), &h, 77).unwrap();
    let b = train(&mut SwimmerEnv::new(config).unwrap(), &h, 77).unwrap();
    assert_eq!(a, b);
    let c = train(&mut SwimmerEnv::new(config).unwrap(), &h, 78).unwrap();
    assert_ne!(a.table, c.table);
}

struct ScaledReward<E> {
    inner: E,
    scale: f64,
}

impl<E: Environment<Scalar = f64>> Environment for ScaledReward<E> {
    type Scalar = f64;

    fn reset(&mut self, seed: u64) -> usize {
        self.inner.reset(seed)
    }

    fn step(&mut self, action: Action) -> Result<Transition<f64>, EnvError> {
        let mut tr = self.inner.step(action)?;
        tr.reward *= self.scale;
        Ok(tr)
    }
}

#[test]
fn reward_scaling_scales_values_and_keeps_actions() {
    let config = EnvConfig { episode_steps: 200, ..EnvConfig::<f64>::default() };
    let h = chain_hyperparams(40);
    let base = train(&mut SwimmerEnv::new(config).unwrap(), &h, 5).unwrap();
    for scale in [0.37, 3.7, 250.0] {
        let mut env = ScaledReward { inner: SwimmerEnv::new(config).unwrap(), scale };
        let scaled = train(&mut env, &h, 5).unwrap();
        assert_eq!(scaled.actions, base.actions, "scale {scale}");
        let norm = base.table.max_abs() * scale;
        for s in 0..NUM_STATES {
            for a in 0..NUM_ACTIONS {
                let want = base.table.values[s][a] * scale;
                assert!((scaled.table.values[s][a] - want).abs() <= 1e-12 * norm);
            }
        }
        assert_eq!(greedy_policy(&scaled.table), greedy_policy(&base.table));
    }
}

#[test]
fn values_respect_the_discounted_reward_bound() {
    let config = EnvConfig { episode_steps: 200, ..EnvConfig::<f64>::default() };
    let h = chain_hyperparams(50);
    let out = train(&mut SwimmerEnv::new(config).unwrap(), &h, 9).unwrap();
    // |dy| per decision is at most (U0 + v_s) * action_interval
    let r_max = (config.field.amplitude() + config.swimmer.swim_speed) * config.action_interval;
    assert!(out.table.max_abs() <= r_max / (1.0 - h.gamma));
    assert!(out.table.values.iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn weak_swimmer_training_makes_progress() {
    let mut env = SwimmerEnv::new(EnvConfig::<f64>::default()).unwrap();
    let h = Hyperparams::default();
    let out = train(&mut env, &h, 2024).unwrap();
    assert_eq!(out.returns.len(), 1000);
    assert_eq!(out.epsilons[0], 1.0);
    assert_eq!(out.epsilons[999], epsilon(&h, 999));
    let first: f64 = out.returns[..100].iter().sum::<f64>() / 100.0;
    let last: f64 = out.returns[900..].iter().sum::<f64>() / 100.0;
    assert!(last >= first, "first {first}, last {last}");
}
