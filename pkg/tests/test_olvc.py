import math

import numpy as np
import pytest

from vecbandits.errors import InvalidConfigError, InvalidInputError, UnsupportedOperationError
from vecbandits.potential import INFINITY, NormParams, lp_norm, ones_norm
from vecbandits.environment import (
    PhasedHalvingSpec,
    StepData,
    StochasticSpec,
    TraceEnvironment,
    Bernoulli,
    Constant,
    phased_halving_env,
    phased_halving_opt,
    stochastic_env,
)
from vecbandits.olvc import (
    AdversarialEpsilon,
    DoublingEpsilon,
    ExplicitEpsilon,
    OlvcConfig,
    adversarial_epsilon,
    benchmark_bound_holds,
    competitive_factor,
    run_olvc,
    run_olvc_doubling,
    stochastic_epsilon,
    surrogate_costs,
)
from vecbandits.oracle import opt_olvc_adversarial


def constant_env(C, T):
    C = np.asarray(C, dtype=float)
    return TraceEnvironment([StepData(C)] * T, C.shape[0], C.shape[1])


class TestSurrogateCosts:
    def test_zero_matrix(self):
        params = NormParams(2, 3, 0.5)
        assert np.allclose(surrogate_costs(params, np.zeros(3), np.zeros((3, 4))), 0.0)

    def test_unit_column_at_zero_load(self):
        params = NormParams(2, 4, 0.5)
        C = np.zeros((4, 2))
        C[0, 0] = 1.0  # action 0 loads dimension 0 only
        costs = surrogate_costs(params, np.zeros(4), C)
        assert costs[0] == pytest.approx(0.5, abs=1e-12)
        assert costs[1] == 0.0

    def test_p1_column_sums(self, rng):
        params = NormParams(1, 3, 0.7)
        C = rng.uniform(0, 1, (3, 5))
        assert np.allclose(surrogate_costs(params, rng.uniform(0, 9, 3), C), C.sum(axis=0))

    def test_range_claim(self, rng):
        # every surrogate cost lies in [0, ||1||_p]
        for _ in range(200):
            p = (1, 2, 5, INFINITY)[rng.integers(4)]
            d = int(rng.integers(1, 9))
            params = NormParams(p, d, float(rng.uniform(1e-3, 1)))
            costs = surrogate_costs(params, rng.uniform(0, 40, d), rng.uniform(0, 1, (d, 6)))
            assert costs.min() >= -1e-12
            assert costs.max() <= ones_norm(p, d) + 1e-12

    def test_rejects_bad_costs(self):
        params = NormParams(2, 2, 0.5)
        with pytest.raises(InvalidInputError):
            surrogate_costs(params, np.zeros(2), np.array([[0.5, 1.5], [0.0, 0.2]]))
        with pytest.raises(InvalidInputError):
            surrogate_costs(params, np.zeros(2), np.zeros((3, 2)))


class TestEpsilonRules:
    def test_adversarial_rule(self):
        assert adversarial_epsilon(INFINITY, 16, 1024.0) == pytest.approx(1 / 5120)
        assert adversarial_epsilon(2, 4, 0.01) == 1.0  # capped

    def test_stochastic_rule(self):
        eps = stochastic_epsilon(2, 4, 20_000)
        assert eps == pytest.approx(math.sqrt(2 / (2 * math.sqrt(20_000))))
        assert stochastic_epsilon(2, 1, 100) == 1.0  # d=1 has no overhead

    def test_competitive_factor(self):
        assert competitive_factor(INFINITY, 16) == 5.0
        assert competitive_factor(2, 1024) == 2.0

    def test_config_validation(self):
        with pytest.raises(InvalidConfigError):
            OlvcConfig(2, 3, 2, 0)
        with pytest.raises(InvalidConfigError):
            OlvcConfig(2, 3, 2, 10, feedback="other")
        cfg = OlvcConfig(2, 3, 2, 10, epsilon_rule=DoublingEpsilon(1.0))
        with pytest.raises(InvalidConfigError):
            cfg.resolve_epsilon()


class TestRunOlvc:
    def test_single_action_exact_load(self):
        C = np.array([[0.3], [0.7]])
        trace = run_olvc(OlvcConfig(2, 2, 1, 9), constant_env(C, 9), seed=0)
        assert np.allclose(trace.final_load, [2.7, 6.3])
        assert np.allclose(trace.plays, 1.0)

    def test_zero_costs_keep_uniform(self):
        trace = run_olvc(OlvcConfig(2, 2, 3, 12), constant_env(np.zeros((2, 3)), 12), seed=0)
        assert np.allclose(trace.plays, 1 / 3)
        assert np.allclose(trace.final_load, 0.0)

    def test_identity_instance_balances(self):
        # the classic 2x2 identity: optimal mix is (0.5, 0.5) with value T/2
        T = 400
        cfg = OlvcConfig(INFINITY, 2, 2, T, epsilon_rule=ExplicitEpsilon(0.5))
        trace = run_olvc(cfg, constant_env(np.eye(2), T), seed=0)
        assert trace.final_norm <= T / 2 + 25  # within regret slack of OPT = T/2
        assert abs(trace.final_load[0] - trace.final_load[1]) < 20

    def test_per_step_potential_inequality(self, rng):
        # claim: psi(t) - psi(t-1) <= (1+eps) <C x, grad at t-1> at every step
        spec = StochasticSpec(
            costs=[[Bernoulli(0.4), Bernoulli(0.9)], [Constant(0.2), Bernoulli(0.8)]], seed=5
        )
        env = stochastic_env(spec, 300)
        cfg = OlvcConfig(3, 2, 2, 300, epsilon_rule=ExplicitEpsilon(0.8))
        trace = run_olvc(cfg, env, seed=1)
        d_psi = np.diff(trace.psi_values)
        assert np.all(d_psi <= (1 + 0.8) * trace.alg_grad_costs + 1e-9)

    def test_telescoped_inequality(self):
        env = constant_env(np.array([[1.0, 0.0], [0.0, 1.0]]), 500)
        cfg = OlvcConfig(INFINITY, 2, 2, 500, epsilon_rule=ExplicitEpsilon(0.3))
        trace = run_olvc(cfg, env, seed=0)
        lhs = trace.psi_values[-1] - trace.psi_values[0]
        assert lhs <= (1 + 0.3) * trace.alg_grad_costs.sum() + 1e-6 * 500

    def test_load_accounting(self, rng):
        spec = StochasticSpec(costs=[[Bernoulli(0.5), Bernoulli(0.2)]], seed=7)
        trace = run_olvc(OlvcConfig(1, 1, 2, 200), stochastic_env(spec, 200), seed=3)
        assert np.allclose(trace.recompute_final_load(), trace.final_load, atol=1e-9)

    def test_full_runs_deterministic(self):
        spec = StochasticSpec(costs=[[Bernoulli(0.5), Bernoulli(0.2)], [Bernoulli(0.3), Bernoulli(0.9)]], seed=4)
        cfg = OlvcConfig(2, 2, 2, 150)
        a = run_olvc(cfg, stochastic_env(spec, 150), seed=0)
        b = run_olvc(cfg, stochastic_env(spec, 150), seed=0)
        assert np.array_equal(a.plays, b.plays)
        assert a.final_norm == b.final_norm

    def test_bandit_mode_plays_single_columns(self):
        env = constant_env(np.array([[0.2, 0.9], [0.8, 0.1]]), 100)
        cfg = OlvcConfig(2, 2, 2, 100, feedback="bandit", epsilon_rule=ExplicitEpsilon(0.5))
        trace = run_olvc(cfg, env, seed=5)
        assert trace.sampled_actions is not None
        for t in range(100):
            i = trace.sampled_actions[t]
            assert np.array_equal(trace.realized_costs[t], env.steps[t].costs[:, i])

    def test_bandit_deterministic_given_seed(self):
        env1 = constant_env(np.array([[0.2, 0.9], [0.8, 0.1]]), 80)
        env2 = constant_env(np.array([[0.2, 0.9], [0.8, 0.1]]), 80)
        cfg = OlvcConfig(2, 2, 2, 80, feedback="bandit")
        a = run_olvc(cfg, env1, seed=9)
        b = run_olvc(cfg, env2, seed=9)
        assert np.array_equal(a.sampled_actions, b.sampled_actions)

    def test_env_exhaustion_rejected(self):
        env = constant_env(np.eye(2), 5)
        with pytest.raises(InvalidInputError):
            run_olvc(OlvcConfig(2, 2, 2, 10), env, seed=0)

    def test_dominant_action_found_stochastic(self):
        # one action is strictly better in every dimension; the learner should
        # concentrate on it and approach the oracle value
        spec = StochasticSpec(
            costs=[[Bernoulli(0.9), Bernoulli(0.1)], [Bernoulli(0.8), Bernoulli(0.15)]], seed=2
        )
        T = 3000
        trace = run_olvc(OlvcConfig(2, 2, 2, T), stochastic_env(spec, T), seed=2)
        assert trace.plays[-1][1] > 0.95
        # realized value close to playing action 1 throughout
        assert trace.final_norm <= 1.25 * T * lp_norm([0.1, 0.15], 2)


class TestAdversarialInstance:
    def test_phased_halving_competitive(self):
        spec = PhasedHalvingSpec(d=8, p=INFINITY, T=512, seed=0)
        env = phased_halving_env(spec)
        opt = phased_halving_opt(spec)
        cfg = OlvcConfig(
            INFINITY, 8, spec.n_actions, 512, epsilon_rule=AdversarialEpsilon(opt)
        )
        trace = run_olvc(cfg, env, seed=0)
        ratio = trace.final_norm / opt
        assert 1.0 <= ratio <= 4.0 * competitive_factor(INFINITY, 8)


class TestDoubling:
    def test_small_opt_stays_in_phase_one(self):
        C = np.array([[0.1], [0.1]])
        cfg = OlvcConfig(2, 2, 1, 10, epsilon_rule=DoublingEpsilon(1.0))
        trace = run_olvc_doubling(cfg, constant_env(C, 10), seed=0)
        assert np.all(trace.phases == 1)

    def test_phase_indices_increment_by_one(self):
        spec = PhasedHalvingSpec(d=8, p=INFINITY, T=600, seed=1)
        cfg = OlvcConfig(INFINITY, 8, spec.n_actions, 600, epsilon_rule=DoublingEpsilon(1.0))
        trace = run_olvc_doubling(cfg, phased_halving_env(spec), seed=0)
        jumps = np.diff(trace.phases)
        assert np.all((jumps == 0) | (jumps == 1))
        assert trace.phases[-1] >= trace.phases[0]

    def test_total_load_bounded_by_geometric_sum(self):
        spec = PhasedHalvingSpec(d=8, p=INFINITY, T=600, seed=1)
        opt = phased_halving_opt(spec)
        c = 1.0
        cfg = OlvcConfig(INFINITY, 8, spec.n_actions, 600, epsilon_rule=DoublingEpsilon(c))
        trace = run_olvc_doubling(cfg, phased_halving_env(spec), seed=0)
        assert trace.final_norm <= 4.0 * c * competitive_factor(INFINITY, 8) * opt

    def test_phase_load_never_exceeds_true_load(self):
        # the imagined per-phase load resets to zero while the true load keeps
        # accumulating, so it stays componentwise below the true load
        from vecbandits.olvc import OlvcState, olvc_step
        from vecbandits.potential import NormParams

        spec = PhasedHalvingSpec(d=8, p=INFINITY, T=120, seed=2)
        env = phased_halving_env(spec)
        cfg = OlvcConfig(INFINITY, 8, spec.n_actions, 120)
        state = OlvcState(
            params=NormParams(INFINITY, 8, 0.1),
            learner=cfg.new_learner(),
            load=np.zeros(8),
            rng=np.random.default_rng(0),
            phase_load=np.zeros(8),
        )
        env.reset()
        for t in range(1, 121):
            olvc_step(state, cfg, env.emit(t, ()).costs)
            if t % 30 == 0:  # mimic a phase reset
                state.phase_load = np.zeros(8)
            assert np.all(state.phase_load <= state.load + 1e-12)

    def test_requires_doubling_rule(self):
        with pytest.raises(InvalidConfigError):
            run_olvc_doubling(OlvcConfig(2, 2, 2, 10), constant_env(np.eye(2), 10), seed=0)
        with pytest.raises(InvalidConfigError):
            run_olvc(
                OlvcConfig(2, 2, 2, 10, epsilon_rule=DoublingEpsilon(1.0)),
                constant_env(np.eye(2), 10),
                seed=0,
            )


class TestBenchmarkDiagnostic:
    def test_holds_at_oracle_optimum(self):
        T = 200
        env = constant_env(np.eye(2), T)
        cfg = OlvcConfig(INFINITY, 2, 2, T, epsilon_rule=ExplicitEpsilon(0.4))
        trace = run_olvc(cfg, env, seed=0, diagnostics=True)
        sol = opt_olvc_adversarial(np.stack([np.eye(2)] * T), INFINITY)
        assert benchmark_bound_holds(trace, sol.x_star)

    def test_holds_at_own_average_play(self):
        spec = StochasticSpec(costs=[[Bernoulli(0.6), Bernoulli(0.3)], [Bernoulli(0.2), Bernoulli(0.7)]], seed=8)
        cfg = OlvcConfig(2, 2, 2, 300, epsilon_rule=ExplicitEpsilon(0.2))
        trace = run_olvc(cfg, stochastic_env(spec, 300), seed=1, diagnostics=True)
        x_avg = trace.plays.mean(axis=0)
        assert benchmark_bound_holds(trace, x_avg)

    def test_zero_cost_env_trivially_holds(self):
        cfg = OlvcConfig(2, 2, 2, 50, epsilon_rule=ExplicitEpsilon(0.5))
        trace = run_olvc(cfg, constant_env(np.zeros((2, 2)), 50), seed=0, diagnostics=True)
        assert benchmark_bound_holds(trace, np.array([1.0, 0.0]))

    def test_needs_diagnostics(self):
        cfg = OlvcConfig(2, 2, 2, 20, epsilon_rule=ExplicitEpsilon(0.5))
        trace = run_olvc(cfg, constant_env(np.zeros((2, 2)), 20), seed=0)
        with pytest.raises(UnsupportedOperationError):
            benchmark_bound_holds(trace, np.array([0.5, 0.5]))
