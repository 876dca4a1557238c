"""How state-dependent kicks move the two collective modes in phase space.

Each kick displaces the center-of-mass mode in proportion to s1 + s2 and the
stretch mode in proportion to s1 - s2, so opposite spins freeze the
center-of-mass polygon entirely. A closed polygon means the mode ends where
it started and the gate leaves no spin-motion entanglement behind.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from fastgate import (
    KickSequence,
    SPIN_CONFIGURATIONS,
    TrapIonConfig,
    closure_sums,
    gate_error,
    trajectory,
)

trap = TrapIonConfig()

# a deliberately unbalanced sequence: the polygons stay open
open_seq = KickSequence.from_arrays([0, 4000, 9000], [1, 2, 1])
# an antiphase pair on a commensurate grid: the center-of-mass mode closes
commensurate = TrapIonConfig(repetition_rate=1000 * trap.trap_frequency / (2 * 3.141592653589793))
closed_seq = KickSequence.from_arrays([0, 500], grid_period=commensurate.grid_period)

for label, seq, cfg in (("open", open_seq, trap), ("antiphase pair", closed_seq, commensurate)):
    s_c, s_s = closure_sums(seq, cfg)
    print(f"{label}: |S_com| = {abs(s_c):.4f}, |S_stretch| = {abs(s_s):.4f}, "
          f"gate error = {gate_error(seq, cfg):.4f}")

fig, axes = plt.subplots(2, 2, figsize=(8, 8))
for ax, spin in zip(axes.ravel(), SPIN_CONFIGURATIONS):
    traj = trajectory(open_seq, trap, spin)
    for mode, color in (("com", "tab:blue"), ("stretch", "tab:orange")):
        v = traj.vertices(mode)
        ax.plot(v.real, v.imag, "o-", color=color, markersize=3, label=mode)
    ax.set_title(f"s = ({spin.s1:+d}, {spin.s2:+d})")
    ax.axhline(0, color="0.8", lw=0.5)
    ax.axvline(0, color="0.8", lw=0.5)
    ax.legend(fontsize=7)
    ax.set_aspect("equal")
fig.suptitle("per-spin phase-space polygons of an open 3-kick sequence")
fig.tight_layout()
fig.savefig("demo_02_phase_space_trajectories.png", dpi=130)
print("wrote demo_02_phase_space_trajectories.png")
