"""Laser-chain bookkeeping: dispersion budget and hardware pulse patterns.

The amplifier chain only stays linear if the accumulated chirp is balanced to
roughly a dozen ps/nm, and the pulse picker/Pockels pair can only emit kick
bursts that fit the amplifier's steady-state window. Both checks are pure
arithmetic but catching them before a cool-down costs nothing.
"""

import numpy as np

from fastgate import (
    DispersionComponent,
    HardwareConstraints,
    KickSequence,
    compile_pattern,
    dispersion_budget,
    tbp_check,
    validate_pattern,
)

chain = [
    DispersionComponent("chirped fiber grating", -9.5, tunable_range=0.005),
    DispersionComponent("chirped volume grating", +12.5),
    DispersionComponent("stretcher fiber 100 m", 100 * -0.041),
]
budget = dispersion_budget(chain, stretcher_coeff=-0.041)
print("dispersion budget")
for c in chain:
    print(f"  {c.name:26s} {c.dispersion:+7.2f} ps/nm")
print(f"  residual {budget.residual:+.2f} ps/nm, balanced: {budget.balanced}")
print(f"  stretcher length change that zeroes it: {budget.stretcher_delta_m:+.1f} m")
print(f"  note: {budget.note}")

report = tbp_check(560e-15, 0.49 / 560e-15)
print(f"time-bandwidth product 0.49 -> {report.excess_over_gaussian:.3f}x the Gaussian limit")

hw = HardwareConstraints()  # 5 GHz grid, 35 ns Pockels, 750-slot steady-state window
burst = KickSequence(((0, 50),))  # 50 comb pulses in one burst
pattern = compile_pattern(burst, hw, horizon_slots=20_000)
checks = validate_pattern(pattern, hw)
print(f"\n50-pulse burst: {len(pattern.pockels_windows)} Pockels gate of "
      f"{(pattern.pockels_windows[0][1]-pattern.pockels_windows[0][0]) * hw.slot_period * 1e9:.0f} ns, "
      f"validator passed: {checks.passed}")

# a sequence spanning 3 us cannot ride one steady-state window: per-burst mode
gate_seq = KickSequence(((0, 3), (5000, 4), (10000, 4), (15000, 3)))
pattern = compile_pattern(gate_seq, hw, horizon_slots=100_000, mode="per-burst")
print(f"3 us gate in per-burst mode: {len(pattern.payload_windows)} payload windows, "
      f"validator passed: {validate_pattern(pattern, hw).passed}")
print("note recorded in the pattern:", pattern.notes[0])

blob = pattern.to_bitstream()
newline = blob.index(b"\n")
print(f"bitstream: {len(blob)} bytes, header: {blob[:newline].decode()}")
transmitted = int(np.sum(pattern.bits))
print(f"{transmitted} of {pattern.horizon_slots} slots transmit")
