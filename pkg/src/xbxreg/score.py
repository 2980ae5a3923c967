"""Proper scoring and rootogram diagnostics for mixed distributions on [0,1].

The continuous ranked probability score (CRPS) of a forecast cdf F at an
outcome z is the integral of (F(t) - 1{t >= z})^2 over the real line; for
distributions supported on [0,1] (with possible point masses at the ends)
the integral collapses to [0,1].
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .model import Dataset, FitResult

_GL_POINTS = 128
_gl_nodes, _gl_weights = np.polynomial.legendre.leggauss(_GL_POINTS)


def _cdf_vec(d, t):
    """Vectorized cdf evaluation for any of the distribution objects."""
    t = np.asarray(t, dtype=float)
    out = np.asarray(d.cdf(t), dtype=float)
    return np.broadcast_to(out, t.shape)


def _segment_integral(d, lo, hi, indicator):
    """∫_lo^hi (F(t) - indicator)^2 dt by fixed-order Gauss-Legendre."""
    if hi <= lo:
        return 0.0
    half = 0.5 * (hi - lo)
    t = 0.5 * (lo + hi) + half * _gl_nodes
    diff = _cdf_vec(d, t) - indicator
    return half * float(np.dot(_gl_weights, diff * diff))


def crps(d, z: float) -> float:
    """CRPS of the forecast distribution d at outcome z in [0,1].

    Split at z: below the outcome the indicator is 0, above it is 1.
    """
    z = float(z)
    if not (0.0 <= z <= 1.0):
        raise DomainError(f"outcome must lie in [0, 1], got {z}")
    return _segment_integral(d, 0.0, z, 0.0) + _segment_integral(d, z, 1.0, 1.0)


def total_score(dists, z) -> float:
    """Sum of per-row CRPS values for paired forecasts and outcomes."""
    z = np.asarray(z, dtype=float)
    if len(dists) != z.size:
        raise ShapeError(f"{len(dists)} distributions but {z.size} outcomes")
    return float(sum(crps(d, zi) for d, zi in zip(dists, z)))


DEFAULT_BREAKS = np.linspace(0.0, 1.0, 11)


@dataclass(frozen=True)
class RootogramTable:
    breaks: np.ndarray
    observed: np.ndarray
    expected: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "breaks", np.asarray(self.breaks, dtype=float))
        object.__setattr__(self, "observed", np.asarray(self.observed, dtype=float))
        object.__setattr__(self, "expected", np.asarray(self.expected, dtype=float))

    @property
    def n_bins(self):
        return self.breaks.size - 1

    @property
    def hanging_residual(self):
        return np.sqrt(self.observed) - np.sqrt(self.expected)

    def to_csv(self) -> str:
        """CSV with raw and square-root frequencies plus hanging residuals
        sqrt(observed) - sqrt(expected)."""
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["bin_lower", "bin_upper", "observed", "expected",
                    "sqrt_observed", "sqrt_expected", "hanging_residual"])
        for b in range(self.n_bins):
            so = float(np.sqrt(self.observed[b]))
            se = float(np.sqrt(self.expected[b]))
            w.writerow([self.breaks[b], self.breaks[b + 1],
                        self.observed[b], self.expected[b], so, se, so - se])
        return buf.getvalue()


def _expected_counts(dists, breaks):
    """Per-bin expected frequencies from per-row cdfs; point masses at the
    boundaries land in the first and last bin."""
    B = breaks.size - 1
    expected = np.zeros(B)
    for d in dists:
        F = np.array([float(np.asarray(d.cdf(b)).reshape(-1)[0]) for b in breaks])
        F[0] = 0.0          # mass at 0 belongs to the first bin
        F[-1] = 1.0
        # cdf is right-continuous with jump p0 at 0, so F(breaks[0]=0) would
        # include p0; resetting to 0 pushes it into bin 1 as required.
        expected += np.diff(F)
    return expected


def rootogram(fit: FitResult, data: Dataset, breaks=None) -> RootogramTable:
    """Observed vs expected bin frequencies for a fitted model."""
    breaks = DEFAULT_BREAKS if breaks is None else np.asarray(breaks, dtype=float)
    if breaks.ndim != 1 or breaks.size < 2 or np.any(np.diff(breaks) <= 0):
        raise DomainError("breaks must be strictly increasing")
    if breaks[0] != 0.0 or breaks[-1] != 1.0:
        raise DomainError("breaks must span [0, 1] exactly")
    y = data.y
    B = breaks.size - 1
    idx = np.clip(np.searchsorted(breaks, y, side="right") - 1, 0, B - 1)
    # y exactly 0 sits below breaks[1] already; y exactly 1 must go to bin B
    observed = np.bincount(idx, minlength=B).astype(float)
    expected = _expected_counts(fit.row_distributions(), breaks)
    return RootogramTable(breaks, observed, expected)


def rootogram_from_distributions(dists, y, breaks=None) -> RootogramTable:
    """Rootogram straight from per-row distributions (no FitResult needed)."""
    breaks = DEFAULT_BREAKS if breaks is None else np.asarray(breaks, dtype=float)
    if breaks[0] != 0.0 or breaks[-1] != 1.0 or np.any(np.diff(breaks) <= 0):
        raise DomainError("breaks must be strictly increasing and span [0, 1]")
    y = np.asarray(y, dtype=float)
    B = breaks.size - 1
    idx = np.clip(np.searchsorted(breaks, y, side="right") - 1, 0, B - 1)
    observed = np.bincount(idx, minlength=B).astype(float)
    return RootogramTable(breaks, observed, _expected_counts(dists, breaks))
