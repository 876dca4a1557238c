"""Reading pulse-to-pulse phase shifts out of interferometric scatter data.

Interfering each payload pulse with its successor at a shared random path
offset turns the pair phase into the opening of an ellipse in the
(pulse-area, reference-area) plane. A direct conic fit recovers that phase
without initialization; identical phases collapse the ellipse onto a line,
which the fit flags instead of inventing geometry.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fastgate import fit_ellipse, phase_from_ellipse, synthesize

fig, axes = plt.subplots(1, 3, figsize=(11, 3.8))
cases = [(0.4, 0.05), (1.2, 0.05), (0.0, 0.0)]
for ax, (true_phase, noise) in zip(axes, cases):
    samples = synthesize(1.0, 0.8, 0.3, -0.2, true_phase, 200, noise=noise, rng_seed=11)
    fit = fit_ellipse(samples)
    ax.plot(samples.u, samples.v, ".", ms=3)
    if fit.degenerate:
        title = f"true {true_phase:.2f}: degenerate (line), branch {fit.relative_phase:.2f}"
    else:
        recovered = phase_from_ellipse(fit)
        title = f"true {true_phase:.2f}: recovered {recovered:.4f}"
    ax.set_title(title, fontsize=9)
    ax.set_xlabel("pulse-pair area u")
    ax.set_ylabel("reference area v")
    print(title)

# statistical behaviour at 5% multiplicative noise
errors = []
for seed in range(100):
    samples = synthesize(1.0, 0.8, 0.3, -0.2, 0.7, 200, noise=0.05, rng_seed=seed)
    errors.append(abs(phase_from_ellipse(fit_ellipse(samples)) - 0.7))
print(f"100 noisy repeats at 0.7 rad: median error {np.median(errors):.4f} rad, "
      f"worst {max(errors):.4f} rad")

fig.tight_layout()
fig.savefig("demo_04_ellipse_phase_extraction.png", dpi=130)
print("wrote demo_04_ellipse_phase_extraction.png")
