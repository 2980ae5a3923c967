"""Scalar special functions used by the densities and analytic gradients.

Standard kernels (log-beta, regularized incomplete beta, digamma, normal
pdf/cdf, chi-square tail) are backed by scipy.special. The generalized
hypergeometric 3F2 series and the shape-parameter derivatives of the
regularized incomplete beta function are implemented here because they
drive the analytic score of the mixture model.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class SeriesControl:
    """Truncation controls for series evaluation."""

    max_terms: int = 10_000
    rel_tol: float = 1e-12

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-6):
            raise DomainError(f"rel_tol must be in (0, 1e-6], got {self.rel_tol}")
        if self.max_terms < 100:
            raise DomainError(f"max_terms must be >= 100, got {self.max_terms}")


DEFAULT_SERIES = SeriesControl()


def log_beta_fn(p: float, q: float) -> float:
    """log B(p, q) for p, q > 0."""
    if not (p > 0 and q > 0):
        raise DomainError(f"log_beta_fn requires positive arguments, got ({p}, {q})")
    return float(sp.betaln(p, q))


def reg_inc_beta(z: float, p: float, q: float) -> float:
    """Regularized incomplete beta I_z(p, q)."""
    if not (p > 0 and q > 0):
        raise DomainError(f"reg_inc_beta requires positive shapes, got ({p}, {q})")
    if not (0.0 <= z <= 1.0):
        raise DomainError(f"reg_inc_beta requires z in [0, 1], got {z}")
    return float(sp.betainc(p, q, z))


def digamma(x: float) -> float:
    """Digamma psi(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"digamma requires a positive argument, got {x}")
    return float(sp.psi(x))


def std_normal_pdf(t: float) -> float:
    return math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)


def std_normal_cdf(t: float) -> float:
    return float(sp.ndtr(t))


def chi2_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution via the regularized
    incomplete gamma function."""
    if df < 1:
        raise DomainError(f"chi2_sf requires df >= 1, got {df}")
    if x < 0:
        raise DomainError(f"chi2_sf requires x >= 0, got {x}")
    return float(sp.gammaincc(df / 2.0, x / 2.0))


def hyp3f2_vec(a1, a2, a3, b1, b2, z, ctrl: SeriesControl = DEFAULT_SERIES):
    """Elementwise 3F2(a1, a2, a3; b1, b2; z) by direct series summation.

    All arguments broadcast. Each entry truncates once its running term has
    stayed below rel_tol times the partial sum for 3 consecutive terms.

    Returns (values, converged) with converged a boolean array.
    """
    a1, a2, a3, b1, b2, z = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (a1, a2, a3, b1, b2, z))
    )
    shape = z.shape
    a1, a2, a3, b1, b2, z = (np.ascontiguousarray(v.ravel()) for v in (a1, a2, a3, b1, b2, z))
    n = z.size
    total = np.ones(n)
    term = np.ones(n)
    peak = np.ones(n)
    below = np.zeros(n, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    for k in range(ctrl.max_terms):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        # overflow/nan here only marks the entry unreliable downstream
        with np.errstate(over="ignore", invalid="ignore"):
            fac = (
                (a1[idx] + k) * (a2[idx] + k) * (a3[idx] + k)
                / ((b1[idx] + k) * (b2[idx] + k) * (k + 1.0))
            ) * z[idx]
            t = term[idx] * fac
            term[idx] = t
            total[idx] += t
        peak[idx] = np.maximum(peak[idx], np.abs(t))
        small = np.abs(t) <= ctrl.rel_tol * np.abs(total[idx])
        b = np.where(small, below[idx] + 1, 0)
        below[idx] = b
        done[idx] = (b >= 3) | (t == 0.0)
    return total.reshape(shape), done.reshape(shape), peak.reshape(shape)


def hyp3f2(a1, a2, a3, b1, b2, z, ctrl: SeriesControl = DEFAULT_SERIES) -> float:
    """Scalar 3F2 at z in [0, 1); raises ConvergenceError on truncation failure."""
    for b, name in ((b1, "b1"), (b2, "b2")):
        if b <= 0 and float(b).is_integer():
            raise DomainError(f"{name} must not be a nonpositive integer, got {b}")
    if not (0.0 <= z < 1.0):
        raise DomainError(f"hyp3f2 requires z in [0, 1), got {z}")
    value, ok, _ = hyp3f2_vec(a1, a2, a3, b1, b2, z, ctrl)
    value = float(value)
    if not bool(ok):
        raise ConvergenceError(
            f"3F2 series did not converge within {ctrl.max_terms} terms "
            f"(z={z}); partial sum {value}",
            partial=value,
            terms=ctrl.max_terms,
        )
    return value


# Series results whose largest intermediate term exceeds the final sum by
# this factor have lost too many digits to cancellation and are discarded.
_CONDITION_CAP = 1e6


def h_factor(z, a, b, ctrl: SeriesControl = DEFAULT_SERIES):
    """z^a / (a^2 B(a, b)) * 3F2(a, a, 1-b; a+1, a+1; z), elementwise.

    The non-elementary part of d/da I_z(a, b). Convergence degrades as
    z -> 1; callers reflect so that z stays at or below 1/2.

    Returns (values, reliable) where reliable is False for entries that
    failed to converge or were destroyed by cancellation.
    """
    z = np.asarray(z, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    f32, ok, peak = hyp3f2_vec(a, a, 1.0 - b, a + 1.0, a + 1.0, z, ctrl)
    ok = ok & (peak <= _CONDITION_CAP * (np.abs(f32) + 1e-300))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_pref = a * np.log(z) - 2.0 * np.log(a) - sp.betaln(a, b)
        out = np.where(z > 0, np.exp(log_pref) * f32, 0.0)
    return out, ok | np.broadcast_to(z == 0, np.broadcast_shapes(z.shape, ok.shape))


def _inc_beta_da_direct(z, a, b, ctrl: SeriesControl = DEFAULT_SERIES):
    """d/da I_z(a, b) without reflection: fast and accurate for z <= 1/2."""
    h, ok = h_factor(z, a, b, ctrl)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logz = np.where(z > 0, np.log(z), 0.0)
    front = sp.betainc(a, b, z) * (logz - sp.psi(a) + sp.psi(a + b))
    return np.where(z > 0, front - h, 0.0), ok


def _inc_beta_db_direct(z, a, b, ctrl: SeriesControl = DEFAULT_SERIES):
    """d/db I_z(a, b) without reflection: fast and accurate for z <= 1/2.

    Uses d/db I_z = I_z {psi(a+b) - psi(b)} + J / B(a, b) with
    J = int_0^z t^{a-1} (1-t)^{b-1} ln(1-t) dt, and the coefficient
    recurrence for (1-t)^{b-1} ln(1-t) = sum_k d_k t^k:

        d_{k+1} = {(k - b + 1) d_k - g_k} / (k + 1),  d_0 = 0,
        g_{m+1} = g_m (m - b + 1) / (m + 1),          g_0 = 1,

    so J = z^a sum_{k>=1} d_k z^k / (a + k).
    """
    z, a, b = np.broadcast_arrays(
        np.asarray(z, dtype=float), np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    )
    shape = z.shape
    z, a, b = (np.ascontiguousarray(v.ravel()) for v in (z, a, b))
    n = z.size
    d = np.zeros(n)
    g = np.ones(n)
    zk = np.ones(n)  # z^k
    series = np.zeros(n)
    peak = np.zeros(n)
    below = np.zeros(n, dtype=np.int64)
    done = z == 0.0
    for k in range(ctrl.max_terms):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        # overflow/nan here only marks the entry unreliable downstream
        with np.errstate(over="ignore", invalid="ignore"):
            d_next = ((k - b[idx] + 1.0) * d[idx] - g[idx]) / (k + 1.0)
            d[idx] = d_next
            g[idx] = g[idx] * (k - b[idx] + 1.0) / (k + 1.0)
            zk[idx] = zk[idx] * z[idx]  # now z^{k+1}
            t = d_next * zk[idx] / (a[idx] + k + 1.0)
            series[idx] += t
        peak[idx] = np.maximum(peak[idx], np.abs(t))
        small = np.abs(t) <= ctrl.rel_tol * (np.abs(series[idx]) + 1e-300)
        bnum = np.where(small & (k >= 2), below[idx] + 1, 0)
        below[idx] = bnum
        done[idx] = bnum >= 3
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_za = a * np.log(np.where(z > 0, z, 1.0))
        scale = np.exp(log_za - sp.betaln(a, b))
        j_term = scale * series
    front = sp.betainc(a, b, z) * (sp.psi(a + b) - sp.psi(b))
    out = np.where(z > 0, front + j_term, 0.0)
    # Rounding noise from the largest series term, propagated to the output;
    # overflow here just means the entry is flagged unreliable.
    with np.errstate(over="ignore", invalid="ignore"):
        abs_err = peak * 1e-15 * scale
        reliable = done & (abs_err <= 1e-9 + 1e-8 * np.abs(out))
    return out.reshape(shape), reliable.reshape(shape)


def inc_beta_param_derivs(z, p, q, ctrl: SeriesControl = DEFAULT_SERIES):
    """Elementwise (d/dp I_z(p, q), d/dq I_z(p, q)).

    Entries with z > 1/2 are computed through I_z(p, q) = 1 - I_{1-z}(q, p)
    so every underlying series runs at an argument of at most 1/2.

    Returns (dp, dq, converged).
    """
    z, p, q = np.broadcast_arrays(
        np.asarray(z, dtype=float), np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    )
    refl = z > 0.5
    zz = np.where(refl, 1.0 - z, z)
    aa = np.where(refl, q, p)
    bb = np.where(refl, p, q)
    # Both series walk a term hump peaking near index bb before they can
    # start converging, and past moderate bb that hump destroys the result
    # by cancellation anyway. Entries that cannot pay off are flagged
    # unconverged immediately instead of burning the full term budget.
    feasible = (bb <= 500.0) & (bb + 128.0 < ctrl.max_terms)
    da = np.full(zz.shape, np.nan)
    db = np.full(zz.shape, np.nan)
    ok = np.zeros(zz.shape, dtype=bool)
    if feasible.any():
        zf, af, bf = zz[feasible], aa[feasible], bb[feasible]
        da_f, ok1 = _inc_beta_da_direct(zf, af, bf, ctrl)
        db_f, ok2 = _inc_beta_db_direct(zf, af, bf, ctrl)
        da[feasible] = da_f
        db[feasible] = db_f
        ok[feasible] = ok1 & ok2
    # Unreflected entries: (dp, dq) = (da, db).
    # Reflected entries: dp = -d/d(bb) I_zz(aa, bb) = -db, dq = -da.
    dp = np.where(refl, -db, da)
    dq = np.where(refl, -da, db)
    return dp, dq, ok


def inc_beta_param_derivs_robust(z, p, q, ctrl: SeriesControl = DEFAULT_SERIES):
    """Like inc_beta_param_derivs, but entries whose series evaluation failed
    (non-convergence or cancellation) are filled in by central finite
    differences of the regularized incomplete beta function."""
    z, p, q = np.broadcast_arrays(
        np.asarray(z, dtype=float), np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    )
    dp, dq, ok = inc_beta_param_derivs(z, p, q, ctrl)
    bad = ~np.asarray(ok)
    if bad.any():
        dp = np.array(dp, copy=True)
        dq = np.array(dq, copy=True)
        zb, pb, qb = z[bad], p[bad], q[bad]
        hp = np.minimum(1e-5 * (1.0 + pb), 0.5 * pb)
        hq = np.minimum(1e-5 * (1.0 + qb), 0.5 * qb)
        dp[bad] = (sp.betainc(pb + hp, qb, zb) - sp.betainc(pb - hp, qb, zb)) / (2.0 * hp)
        dq[bad] = (sp.betainc(pb, qb + hq, zb) - sp.betainc(pb, qb - hq, zb)) / (2.0 * hq)
    return dp, dq
