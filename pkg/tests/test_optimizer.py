"""Genetic-search, seeding, and exhaustive-enumeration tests."""

import math

import numpy as np
import pytest

from fastgate import TrapIonConfig, closure_from_times, gate_error, gate_phase
from fastgate.exceptions import BudgetError, DomainError
from fastgate.optimizer import (
    OptimizerConfig,
    balance_kick_times,
    continuous_seed,
    enumeration_states,
    evolve,
    exhaustive_small_search,
)

TWO_PI = 2.0 * math.pi
CONFIG = TrapIonConfig()


def coarse_instance(window, span_periods, z_max, seed=0, **overrides):
    """A trap/optimizer pair whose slot grid has `window` slots over the span."""
    period = CONFIG.trap_period
    tau = span_periods * period / window
    cfg = TrapIonConfig(repetition_rate=1.0 / tau)
    defaults = dict(population_size=24, generations=30, mutation_rate=0.4,
                    max_kicks=3, max_multiplicity=z_max,
                    duration_budget=(window - 0.5) * tau / period,
                    tolerance_eps=0.1, tolerance_phi=0.1, rng_seed=seed)
    defaults.update(overrides)
    return cfg, OptimizerConfig(**defaults)


class TestOptimizerConfig:
    def test_validation(self):
        with pytest.raises(DomainError):
            OptimizerConfig(population_size=1)
        with pytest.raises(DomainError):
            OptimizerConfig(tolerance_eps=0.0)
        with pytest.raises(DomainError):
            OptimizerConfig(duration_budget=-1.0)
        with pytest.raises(DomainError):
            OptimizerConfig(mutation_rate=1.5)


class TestContinuousSeed:
    def test_antiphase_pair_closes_com_mode(self):
        # two kicks half a trap period apart null the center-of-mass sum
        times = np.array([0.0, math.pi / CONFIG.trap_frequency])
        s_c, _ = closure_from_times(times, [1, 1], CONFIG)
        assert abs(s_c) < 1e-12

    def test_four_kick_seed_is_nearly_closed(self):
        seq = continuous_seed(CONFIG, 4)
        assert gate_error(seq, CONFIG) < 0.05
        assert len(seq) == 4
        assert all(z == 1 for z in seq.multiplicities)

    def test_snap_moves_each_kick_at_most_half_slot(self):
        times = balance_kick_times(CONFIG, 4)
        seq = continuous_seed(CONFIG, 4)
        deviation = np.abs(np.asarray(seq.slots) * CONFIG.grid_period - times)
        assert np.all(deviation <= 0.5 * CONFIG.grid_period + 1e-18)

    def test_single_kick_rejected(self):
        with pytest.raises(DomainError):
            continuous_seed(CONFIG, 1)

    @pytest.mark.parametrize("n", [2, 3, 5, 6])
    def test_seed_counts(self, n):
        seq = continuous_seed(CONFIG, n)
        assert len(seq) == n
        assert seq.duration <= 0.85 * CONFIG.trap_period


class TestEvolve:
    def test_deterministic_for_seed(self):
        cfg, opt = coarse_instance(40, 0.5, 2, seed=11, generations=12)
        first = evolve([], opt, cfg)
        second = evolve([], opt, cfg)
        assert first.best.sequence.kicks == second.best.sequence.kicks
        assert first.history == second.history
        assert first.best.fitness == second.best.fitness

    def test_history_is_monotone(self):
        cfg, opt = coarse_instance(60, 0.6, 2, seed=5, generations=25)
        res = evolve([], opt, cfg)
        assert len(res.history) == opt.generations
        assert all(a >= b - 1e-12 for a, b in zip(res.history, res.history[1:]))

    def test_degenerate_tolerances_return_zero_duration(self):
        opt = OptimizerConfig(population_size=8, generations=4,
                              tolerance_eps=math.inf, tolerance_phi=math.inf, rng_seed=3)
        res = evolve([], opt, CONFIG)
        assert res.feasible
        assert res.best.sequence.duration == 0.0
        assert len(res.best.sequence) == 1

    def test_feasibility_flag_rederivable_from_core(self):
        cfg, opt = coarse_instance(50, 0.5, 2, seed=2, generations=10)
        res = evolve([], opt, cfg)
        seq = res.best.sequence
        eps = gate_error(seq, cfg)
        phi = gate_phase(seq, cfg)
        violation = min(abs(abs(phi) - (opt.phase_target + TWO_PI * n)) for n in range(9))
        expected = eps <= opt.tolerance_eps and violation <= opt.tolerance_phi
        assert res.best.feasible == expected
        assert res.feasible == res.best.feasible

    def test_infeasible_reported_explicitly(self):
        # two unit kicks cannot reach the phase target: the kernel bound caps |phi|
        cfg, opt = coarse_instance(30, 1.0, 1, seed=1, generations=8,
                                   max_kicks=2, tolerance_eps=1e-3, tolerance_phi=1e-3)
        res = evolve([], opt, cfg)
        assert not res.feasible
        assert not res.best.feasible
        assert res.best.sequence is not None

    def test_reference_scale_problem_quickly_feasible(self):
        opt = OptimizerConfig(population_size=32, generations=6, rng_seed=12)
        res = evolve([continuous_seed(CONFIG, 4)], opt, CONFIG)
        assert res.feasible
        seq = res.best.sequence
        assert seq.duration <= 0.85 * CONFIG.trap_period
        assert gate_error(seq, CONFIG) <= 1e-3
        phi = gate_phase(seq, CONFIG)
        assert min(abs(abs(phi) - (math.pi / 4 + TWO_PI * n)) for n in range(9)) <= 1e-3


class TestExhaustiveSearch:
    def test_single_slot_window(self):
        cfg, opt = coarse_instance(10, 0.2, 1, seed=0)
        res = exhaustive_small_search(cfg, opt, 1, 1, 1)
        assert len(res.candidates) == 1
        seq = res.candidates[0].sequence
        assert seq.kicks == ((0, 1),)
        assert res.candidates[0].fitness == pytest.approx(
            1e3 * max(0.0, gate_error(seq, cfg) - opt.tolerance_eps)
            + 1e3 * (math.pi / 4 - opt.tolerance_phi))

    def test_budget_guard(self):
        cfg, opt = coarse_instance(40, 0.5, 2, seed=0)
        with pytest.raises(BudgetError):
            exhaustive_small_search(cfg, opt, 3, 5000, 8)
        with pytest.raises(DomainError):
            exhaustive_small_search(cfg, opt, 4, 10, 1)

    def test_two_kick_phase_bound_has_no_feasible_candidate(self):
        # |phi| <= alpha_eff^2 z^2 (1 + 1/sqrt3) < pi/4 for unit kicks
        cfg, opt = coarse_instance(40, 1.2, 1, seed=0, max_kicks=2,
                                   tolerance_eps=1e-3, tolerance_phi=1e-3)
        alpha_eff_sq = (2 * 0.12218211826424154) ** 2
        assert alpha_eff_sq * (1 + 1 / math.sqrt(3)) < math.pi / 4
        res = exhaustive_small_search(cfg, opt, 2, 40, 1)
        assert not any(c.feasible for c in res.candidates)

    def test_ranking_prefers_feasible_then_duration(self):
        cfg, opt = coarse_instance(60, 0.6, 2, seed=4, tolerance_eps=0.5, tolerance_phi=0.5)
        res = exhaustive_small_search(cfg, opt, 2, 60, 2)
        flags = [c.feasible for c in res.candidates]
        assert flags == sorted(flags, reverse=True)
        feasible = [c for c in res.candidates if c.feasible]
        durations = [c.sequence.duration for c in feasible]
        assert durations == sorted(durations)

    def test_ga_never_beats_enumeration_and_lands_close(self):
        cfg, opt = coarse_instance(120, 0.5, 1, seed=9, generations=40,
                                   population_size=32, tolerance_eps=0.05, tolerance_phi=0.05)
        enum = exhaustive_small_search(cfg, opt, 3, 120, 1)
        ga = evolve([], opt, cfg, refine_every=5)
        assert ga.best.fitness >= enum.optimum_fitness - 1e-9
        assert ga.best.fitness <= enum.optimum_fitness * 1.05 + 1e-12

    def test_grid_refinement_never_worse(self):
        # a 4x finer grid contains every coarse-grid candidate
        period = CONFIG.trap_period
        tau = 1.2 * period / 40
        for factor, window in ((1, 40), (4, 160)):
            cfg = TrapIonConfig(repetition_rate=factor / tau)
            opt = OptimizerConfig(max_kicks=2, max_multiplicity=1,
                                  duration_budget=(window - 0.5) * tau / factor / period,
                                  tolerance_eps=1e-3, tolerance_phi=1e-3, rng_seed=0)
            res = exhaustive_small_search(cfg, opt, 2, window, 1)
            if factor == 1:
                coarse = res.optimum_fitness
            else:
                assert res.optimum_fitness <= coarse + 1e-12

    def test_states_formula(self):
        assert enumeration_states(10, 2, 2) == 10 * 2 + math.comb(10, 2) * 4
