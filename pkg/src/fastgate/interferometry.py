"""Pulse-to-pulse phase extraction from interferometric pulse-area scatter.

Interfering each payload pulse with its successor at a random but shared path
offset maps the pair phases onto a Lissajous-type figure: plotting one pair's
pulse area against the reference pair's traces out an ellipse whose shape
encodes the relative phase, or collapses to a line segment when the phases
match. Fitting the conic directly recovers that phase with no initialization.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

MIN_POINTS = 6  # a general conic has five free parameters


@dataclass(frozen=True)
class PulsePairSamples:
    """Paired pulse-area samples (u_i, v_i) across repeated path offsets."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.shape != v.shape or u.ndim != 1:
            raise DomainError("u and v must be 1-d arrays of equal length")
        if not (np.isfinite(u).all() and np.isfinite(v).all()):
            raise DomainError("samples must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def __len__(self):
        return self.u.size

    @classmethod
    def from_csv(cls, text: str) -> "PulsePairSamples":
        """Parse two-column CSV (u, v); a non-numeric first row is a header."""
        rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
        if rows and rows[0] and rows[0][0].lstrip().startswith("#"):
            rows = rows[1:]
        start = 0
        if rows:
            try:
                float(rows[0][0])
            except (ValueError, IndexError):
                start = 1
        u, v = [], []
        for row in rows[start:]:
            if len(row) < 2:
                raise DomainError(f"expected two columns, got {row!r}")
            u.append(float(row[0]))
            v.append(float(row[1]))
        return cls(np.array(u), np.array(v))

    def to_csv(self) -> str:
        lines = ["u,v"]
        lines += [f"{float(u)!r},{float(v)!r}" for u, v in zip(self.u, self.v)]
        return "\n".join(lines) + "\n"


def synthesize(amp_u, amp_v, offset_u, offset_v, delta_phi, n_points, noise=0.0,
               rng_seed=0) -> PulsePairSamples:
    """Generate pulse-area pairs u = off_u + A cos(theta), v = off_v + B cos(theta + dphi).

    theta is uniform over [0, 2*pi), standing in for the random path offset
    shared by both pulse pairs. Multiplicative Gaussian noise of the given
    fractional level is applied to each measured area. Deterministic for a
    fixed rng_seed.
    """
    if amp_u <= 0 or amp_v <= 0:
        raise DomainError("amplitudes must be positive")
    if n_points < MIN_POINTS:
        raise DomainError(f"need at least {MIN_POINTS} points for a conic fit, got {n_points}")
    rng = np.random.default_rng(rng_seed)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n_points)
    u = offset_u + amp_u * np.cos(theta)
    v = offset_v + amp_v * np.cos(theta + delta_phi)
    if noise:
        u = u * (1.0 + noise * rng.standard_normal(n_points))
        v = v * (1.0 + noise * rng.standard_normal(n_points))
    return PulsePairSamples(u, v)


@dataclass(frozen=True)
class EllipseFitResult:
    """Conic fit of pulse-area pairs, normalized so that a + c = 1.

    ``relative_phase`` is the pair phase difference in [0, pi]; its sign is
    not observable from an ellipse. Degenerate (collinear) data sets the flag
    and reports the 0-or-pi branch suggested by the correlation sign instead
    of a spurious ellipse.
    """

    coefficients: tuple
    relative_phase: float
    degenerate: bool
    residual_rms: float

    @property
    def is_ellipse(self):
        a, b, c, _, _, _ = self.coefficients
        return (not self.degenerate) and b * b - 4 * a * c < 0


def _conic_residual_rms(coeff, u, v):
    a, b, c, d, e, f = coeff
    r = a * u * u + b * u * v + c * v * v + d * u + e * v + f
    return float(np.sqrt(np.mean(r * r)))


def _direct_ellipse_fit(u, v):
    """Constrained direct least-squares conic fit (stable eigen formulation).

    Returns [a, b, c, d, e, f] with b^2 - 4ac < 0, or None when no admissible
    eigenvector exists.
    """
    d1 = np.column_stack([u * u, u * v, v * v])
    d2 = np.column_stack([u, v, np.ones_like(u)])
    s1 = d1.T @ d1
    s2 = d1.T @ d2
    s3 = d2.T @ d2
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError:
        return None
    m = s1 + s2 @ t
    c1_inv = np.array([[0.0, 0.0, 0.5], [0.0, -1.0, 0.0], [0.5, 0.0, 0.0]])
    m = c1_inv @ m
    eigval, eigvec = np.linalg.eig(m)
    best = None
    for idx in range(3):
        vec = np.real(eigvec[:, idx])
        constraint = 4.0 * vec[0] * vec[2] - vec[1] ** 2
        if constraint > 0:
            candidate = np.concatenate([vec, t @ vec])
            if best is None or abs(np.real(eigval[idx])) < best[0]:
                best = (abs(np.real(eigval[idx])), candidate)
    return None if best is None else best[1]


def fit_ellipse(samples: PulsePairSamples) -> EllipseFitResult:
    """Fit an ellipse-constrained conic to pulse-area pairs.

    The fit runs on centered, isotropically scaled coordinates for numerical
    stability and the conic is mapped back to the original axes. Collinear
    data is reported as degenerate, not fitted.
    """
    if len(samples) < MIN_POINTS:
        raise DomainError(f"need at least {MIN_POINTS} points, got {len(samples)}")
    u, v = samples.u, samples.v

    mu, mv = u.mean(), v.mean()
    uc, vc = u - mu, v - mv
    scale = math.sqrt(np.mean(uc * uc + vc * vc))
    if scale == 0.0:
        raise DomainError("all samples coincide; no conic is defined")

    # rank of the centered scatter: a line segment has one vanishing direction
    sing = np.linalg.svd(np.column_stack([uc, vc]), compute_uv=False)
    if sing[1] <= 1e-9 * sing[0]:
        slope = float(np.sign(np.sum(uc * vc)))
        branch = 0.0 if slope >= 0 else math.pi
        return EllipseFitResult(coefficients=(0.0,) * 6, relative_phase=branch,
                                degenerate=True, residual_rms=0.0)

    un, vn = uc / scale, vc / scale
    conic_n = _direct_ellipse_fit(un, vn)
    if conic_n is None:
        slope = float(np.sign(np.sum(uc * vc)))
        return EllipseFitResult(coefficients=(0.0,) * 6,
                                relative_phase=0.0 if slope >= 0 else math.pi,
                                degenerate=True, residual_rms=0.0)

    # undo u' = (u - mu)/s, v' = (v - mv)/s on the conic coefficients
    an, bn, cn, dn, en, fn = conic_n
    s = scale
    a = an / s ** 2
    b = bn / s ** 2
    c = cn / s ** 2
    d = (-2 * an * mu - bn * mv) / s ** 2 + dn / s
    e = (-2 * cn * mv - bn * mu) / s ** 2 + en / s
    f = (an * mu ** 2 + bn * mu * mv + cn * mv ** 2) / s ** 2 - (dn * mu + en * mv) / s + fn

    coeff = np.array([a, b, c, d, e, f])
    if a + c == 0:
        return EllipseFitResult(coefficients=tuple(coeff), relative_phase=0.0,
                                degenerate=True, residual_rms=_conic_residual_rms(coeff, u, v))
    coeff = coeff / (a + c)
    a, b, c = coeff[0], coeff[1], coeff[2]

    argument = -b / (2.0 * math.sqrt(a * c))
    phase = math.acos(min(1.0, max(-1.0, argument)))
    return EllipseFitResult(
        coefficients=tuple(float(x) for x in coeff),
        relative_phase=phase,
        degenerate=False,
        residual_rms=_conic_residual_rms(coeff, u, v),
    )


def phase_from_ellipse(fit: EllipseFitResult) -> float:
    """Relative phase in [0, pi] from a fitted conic.

    After centering, the samples obey u'^2 + v'^2 - 2 u' v' cos(dphi) =
    sin(dphi)^2 in amplitude-normalized coordinates, so cos(dphi) =
    -b / (2 sqrt(a c)), which is invariant under axis scaling. A degenerate
    fit returns its 0-or-pi branch; the ambiguity is visible on the flag.
    """
    return fit.relative_phase
