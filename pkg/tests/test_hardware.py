"""Pattern compiler, validator, dispersion budget, and serialization tests."""

import math

import numpy as np
import pytest

from fastgate import KickSequence
from fastgate.exceptions import CapacityError, CollisionError, DomainError
from fastgate.hardware import (
    DispersionComponent,
    HardwareConstraints,
    PulsePattern,
    compile_pattern,
    dispersion_budget,
    tbp_check,
    validate_pattern,
)

HW = HardwareConstraints()


def random_in_capacity_sequence(rng, budget=750):
    """Random sequence whose expanded bursts fit one steady-state window."""
    n = int(rng.integers(1, 7))
    while True:
        slots = np.sort(rng.choice(budget - 20, size=n, replace=False))
        gaps = np.diff(np.append(slots, budget))
        if np.all(gaps >= 1):
            break
    mults = [int(rng.integers(1, max(2, min(8, int(g))))) for g in gaps]
    return KickSequence.from_arrays(slots.tolist(), mults)


class TestCompilePattern:
    def test_empty_sequence_is_all_idle(self):
        pattern = compile_pattern(KickSequence(()), HW, horizon_slots=2000)
        assert pattern.pockels_windows == ()
        assert pattern.payload_windows == ()
        expected = np.zeros(2000, dtype=np.uint8)
        expected[::4] = 1
        assert np.array_equal(pattern.bits, expected)

    def test_long_gate_exceeds_single_window(self):
        # 4 kicks spanning 3 us at a 200 ps grid need 15000 slots, not 750
        seq = KickSequence.from_arrays([0, 5000, 10000, 15000])
        with pytest.raises(CapacityError):
            compile_pattern(seq, HW, horizon_slots=100_000)
        pattern = compile_pattern(seq, HW, horizon_slots=100_000, mode="per-burst")
        assert len(pattern.payload_windows) == 4
        assert validate_pattern(pattern, HW).passed
        assert any("per-burst" in note for note in pattern.notes)

    def test_fifty_pulse_burst_gets_exact_minimum_gate(self):
        pattern = compile_pattern(KickSequence(((0, 50),)), HW, horizon_slots=5000)
        assert pattern.payload_windows == ((0, 50),)
        assert len(pattern.pockels_windows) == 1
        start, end = pattern.pockels_windows[0]
        assert end - start == HW.pockels_min_slots == 175
        assert (end - start) * HW.slot_period == pytest.approx(35e-9)

    def test_burst_expansion_and_gate_merging(self):
        # two bursts 10 slots apart cannot host separate 35 ns gates
        seq = KickSequence(((0, 5), (15, 5)))
        pattern = compile_pattern(seq, HW, horizon_slots=4000)
        assert len(pattern.pockels_windows) == 1
        bits = pattern.bits
        assert np.all(bits[0:5] == 1) and np.all(bits[15:20] == 1)
        assert np.all(bits[5:15] == 0)  # picker dark inside the gate

    def test_overlapping_bursts_rejected_with_indices(self):
        seq = KickSequence(((0, 10), (5, 1)))
        with pytest.raises(CollisionError) as err:
            compile_pattern(seq, HW, horizon_slots=4000)
        assert err.value.kick_indices == (1,)

    def test_payload_placed_at_horizon_start(self):
        seq = KickSequence(((100, 2), (200, 3)))
        pattern = compile_pattern(seq, HW, horizon_slots=4000)
        assert pattern.payload_windows[0][0] == 0
        assert pattern.bits[0] == 1  # first kick shifted to slot 0

    def test_horizon_too_small(self):
        with pytest.raises(CapacityError):
            compile_pattern(KickSequence(((0, 50),)), HW, horizon_slots=100)


class TestValidatePattern:
    def test_compiled_pattern_passes(self):
        seq = KickSequence(((0, 3), (40, 2), (300, 4)))
        report = validate_pattern(compile_pattern(seq, HW, horizon_slots=3000), HW)
        assert report.passed, report.to_json()

    def test_short_gate_reported(self):
        bits = np.zeros(1000, dtype=np.uint8)
        bits[::4] = 1
        bits[0:100] = 0
        bits[0:10] = 1
        pattern = PulsePattern(bits=bits, slot_period=HW.slot_period,
                               pockels_windows=((0, 100),), payload_windows=((0, 10),),
                               idle_decimation=4)
        report = validate_pattern(pattern, HW)
        failed = {check.name for check in report.failures()}
        assert "pockels_windows_meet_minimum" in failed

    def test_oversized_payload_reported(self):
        bits = np.zeros(2000, dtype=np.uint8)
        bits[0:751] = 1
        pattern = PulsePattern(bits=bits, slot_period=HW.slot_period,
                               pockels_windows=((0, 751),), payload_windows=((0, 751),),
                               idle_decimation=4)
        report = validate_pattern(pattern, HW)
        failed = {check.name for check in report.failures()}
        assert "payload_within_steady_state_budget" in failed

    def test_ungated_payload_reported(self):
        bits = np.zeros(1000, dtype=np.uint8)
        bits[200:210] = 1
        pattern = PulsePattern(bits=bits, slot_period=HW.slot_period,
                               pockels_windows=(), payload_windows=((200, 10),),
                               idle_decimation=4)
        report = validate_pattern(pattern, HW)
        failed = {check.name for check in report.failures()}
        assert "payload_slots_inside_pockels_windows" in failed
        assert "idle_follows_decimation_pattern" in failed

    def test_fuzz_compile_validate_roundtrip(self):
        rng = np.random.default_rng(1234)
        for _ in range(300):
            seq = random_in_capacity_sequence(rng)
            pattern = compile_pattern(seq, HW, horizon_slots=10_000)
            report = validate_pattern(pattern, HW)
            assert report.passed, report.to_json()
            back = PulsePattern.from_rle_json(pattern.to_rle_json())
            assert np.array_equal(back.bits, pattern.bits)
            assert back.pockels_windows == pattern.pockels_windows
            assert np.array_equal(
                PulsePattern.bits_from_bitstream(pattern.to_bitstream()), pattern.bits)


class TestSerialization:
    def test_rle_json_round_trip_exact(self):
        seq = KickSequence(((0, 2), (50, 1), (600, 7)))
        pattern = compile_pattern(seq, HW, horizon_slots=5000)
        clone = PulsePattern.from_rle_json(pattern.to_rle_json())
        assert np.array_equal(clone.bits, pattern.bits)
        assert clone.payload_windows == pattern.payload_windows
        assert clone.slot_period == pattern.slot_period
        assert clone.to_rle_json() == pattern.to_rle_json()

    def test_bitstream_header_and_payload(self):
        pattern = compile_pattern(KickSequence(((0, 4),)), HW, horizon_slots=1000)
        blob = pattern.to_bitstream()
        header = blob[:blob.index(b"\n")].decode()
        assert header.startswith("FGPAT1")
        assert "slots=1000" in header and "byte1=transmit" in header
        assert np.array_equal(PulsePattern.bits_from_bitstream(blob), pattern.bits)

    def test_bitstream_length_mismatch_rejected(self):
        pattern = compile_pattern(KickSequence(((0, 4),)), HW, horizon_slots=1000)
        with pytest.raises(DomainError):
            PulsePattern.bits_from_bitstream(pattern.to_bitstream()[:-5])


class TestDispersionBudget:
    def test_single_unbalanced_component(self):
        budget = dispersion_budget([DispersionComponent("grating", -9.5)])
        assert budget.residual == pytest.approx(-9.5)
        assert not budget.balanced

    def test_reference_chain(self):
        budget = dispersion_budget([
            DispersionComponent("fiber grating", -9.5, tunable_range=0.005),
            DispersionComponent("volume grating", +12.5),
            DispersionComponent("stretcher fiber 100 m", 100 * -0.041),
        ])
        assert budget.residual == pytest.approx(-1.1, abs=1e-12)
        assert not budget.balanced
        assert budget.stretcher_delta_m == pytest.approx(-1.1 / 0.041, rel=1e-9)
        assert abs(budget.stretcher_delta_m) == pytest.approx(26.83, abs=0.01)
        assert "unlisted" in budget.note

    def test_tuning_range_classification(self):
        tunable = [DispersionComponent("fiber grating", 0.004, tunable_range=0.005)]
        assert dispersion_budget(tunable).balanced
        drifted = [DispersionComponent("fiber grating", 0.010, tunable_range=0.005)]
        assert not dispersion_budget(drifted).balanced

    def test_permutation_and_concatenation_invariance(self):
        parts = [DispersionComponent(f"c{i}", d, t)
                 for i, (d, t) in enumerate([(-9.5, 0.005), (12.5, 0.0), (-4.1, 0.0), (0.7, 0.002)])]
        forward = dispersion_budget(parts)
        reversed_ = dispersion_budget(parts[::-1])
        assert forward.residual == pytest.approx(reversed_.residual, abs=1e-15)
        assert forward.tunable_margin == reversed_.tunable_margin
        split = (dispersion_budget(parts[:2]).residual + dispersion_budget(parts[2:]).residual)
        assert split == pytest.approx(forward.residual, abs=1e-15)

    def test_empty_list_rejected(self):
        with pytest.raises(DomainError):
            dispersion_budget([])


class TestTbpCheck:
    def test_transform_limited_gaussian(self):
        limit = 2 * math.log(2) / math.pi
        report = tbp_check(1e-12, limit / 1e-12)
        assert report.excess_over_gaussian == pytest.approx(1.0, abs=1e-12)

    def test_measured_pulse(self):
        report = tbp_check(560e-15, 0.49 / 560e-15)
        assert report.tbp == pytest.approx(0.49)
        assert report.excess_over_gaussian == pytest.approx(1.111, abs=2e-3)
        # 560 fs at the measured product implies 875 GHz of spectrum
        assert 0.49 / 560e-15 == pytest.approx(875e9, rel=1e-3)

    def test_positive_inputs_required(self):
        with pytest.raises(DomainError):
            tbp_check(0.0, 1e12)
