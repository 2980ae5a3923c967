"""Regression layer: links, families, likelihoods, analytic scores, fitting.

Families: heteroscedastic normal ("normal"), doubly censored normal ("cn",
the two-limit tobit), beta regression on rescaled responses ("beta"),
extended-support beta with fixed exceedance ("xb"), and the exponential
mixture ("xbx"). All families share the linear-predictor structure
g1(mu_i) = x_i' beta, g2(phi_i or sigma_i) = z_i' gamma; the mixture adds
the unconstrained log mixing mean xi = log nu.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize, special as sp

from . import dist
from .errors import DomainError, FitError, ShapeError
from .kernels import xb_loglik_grid
from .quad import DEFAULT_ORDER, gauss_laguerre
from .special import inc_beta_param_derivs_robust

LOG_PHI_CAP = math.log(1e8)
FAMILIES = ("normal", "cn", "beta", "xb", "xbx")


# ---------------------------------------------------------------------------
# Links

@dataclass(frozen=True)
class LinkFunction:
    name: str
    forward: callable       # parameter -> linear predictor
    inverse: callable       # linear predictor -> parameter
    inverse_deriv: callable  # d parameter / d linear predictor, as f(eta)


def _logit(x):
    return np.log(x) - np.log1p(-x)


LINKS = {
    "logit": LinkFunction("logit", _logit, sp.expit, lambda e: sp.expit(e) * sp.expit(-e)),
    "probit": LinkFunction("probit", sp.ndtri, sp.ndtr,
                           lambda e: np.exp(-0.5 * e * e) / math.sqrt(2 * math.pi)),
    "cloglog": LinkFunction("cloglog",
                            lambda x: np.log(-np.log1p(-x)),
                            lambda e: -np.expm1(-np.exp(e)),
                            lambda e: np.exp(e - np.exp(e))),
    "log": LinkFunction("log", np.log, np.exp, np.exp),
    "identity": LinkFunction("identity", lambda x: x, lambda e: e, lambda e: np.ones_like(e)),
}


def get_link(name: str) -> LinkFunction:
    try:
        return LINKS[name]
    except KeyError:
        raise DomainError(f"unknown link {name!r}; choose from {sorted(LINKS)}") from None


# ---------------------------------------------------------------------------
# Data and specification

@dataclass(frozen=True)
class Dataset:
    y: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    x_names: tuple = ()
    z_names: tuple = ()

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=float)
        X = np.ascontiguousarray(self.X, dtype=float)
        Z = np.ascontiguousarray(self.Z, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Z", Z)
        if X.ndim != 2 or Z.ndim != 2 or y.ndim != 1:
            raise ShapeError("y must be 1-d; X and Z must be 2-d")
        n = y.size
        if X.shape[0] != n or Z.shape[0] != n:
            raise ShapeError("row counts of y, X, Z differ")
        if not (np.isfinite(y).all() and np.isfinite(X).all() and np.isfinite(Z).all()):
            raise DomainError("non-finite entries in the data")
        if np.any((y < 0.0) | (y > 1.0)):
            raise DomainError("responses must lie in [0, 1]")
        if n < X.shape[1] + Z.shape[1] + 1:
            raise ShapeError(
                f"need n >= p + q + 1, got n={n}, p={X.shape[1]}, q={Z.shape[1]}"
            )
        if not self.x_names:
            object.__setattr__(self, "x_names", tuple(f"x{j}" for j in range(X.shape[1])))
        if not self.z_names:
            object.__setattr__(self, "z_names", tuple(f"z{j}" for j in range(Z.shape[1])))

    @property
    def n(self):
        return self.y.size


def default_links(family: str):
    if family in ("normal", "cn"):
        return "identity", "log"
    return "logit", "log"


@dataclass(frozen=True)
class ModelSpec:
    family: str = "xbx"
    mean_link: str | None = None
    precision_link: str | None = None
    quad_order: int = DEFAULT_ORDER
    rescale_u: float | None = None   # beta family; default 1/(2(n-1))
    fixed_u: float | None = None     # xb family

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        ml, pl = default_links(self.family)
        if self.mean_link is None:
            object.__setattr__(self, "mean_link", ml)
        if self.precision_link is None:
            object.__setattr__(self, "precision_link", pl)
        get_link(self.mean_link)
        get_link(self.precision_link)
        if self.family == "xb" and self.fixed_u is None:
            raise DomainError("family 'xb' requires fixed_u")
        if self.rescale_u is not None and self.rescale_u <= 0:
            raise DomainError("rescale_u must be positive")

    @property
    def has_xi(self):
        return self.family == "xbx"

    def effective_rescale_u(self, n: int) -> float:
        return self.rescale_u if self.rescale_u is not None else 1.0 / (2.0 * (n - 1))


@dataclass(frozen=True)
class ParameterVector:
    beta: np.ndarray
    gamma: np.ndarray
    xi: float | None = None

    def pack(self):
        parts = [self.beta, self.gamma]
        if self.xi is not None:
            parts.append([self.xi])
        return np.concatenate(parts).astype(float)

    @staticmethod
    def unpack(theta, p, q, has_xi):
        theta = np.asarray(theta, dtype=float)
        xi = float(theta[p + q]) if has_xi else None
        return ParameterVector(theta[:p].copy(), theta[p:p + q].copy(), xi)


class _RejectedStep(Exception):
    """Parameter point outside the numerically evaluable region."""


def linear_predictors(spec: ModelSpec, data: Dataset, params: ParameterVector):
    """(eta, zeta, mu, phi) for the given coefficients.

    phi is the precision for the beta-type families and the latent standard
    deviation for normal/cn. Raises _RejectedStep when the precision
    predictor exceeds the overflow cap or the mean saturates its link.
    """
    beta = np.asarray(params.beta, dtype=float)
    gamma = np.asarray(params.gamma, dtype=float)
    if beta.size != data.X.shape[1] or gamma.size != data.Z.shape[1]:
        raise ShapeError(
            f"coefficient lengths ({beta.size}, {gamma.size}) do not match designs "
            f"({data.X.shape[1]}, {data.Z.shape[1]})"
        )
    eta = data.X @ beta
    zeta = data.Z @ gamma
    if np.any(zeta > LOG_PHI_CAP):
        raise _RejectedStep("precision predictor above overflow cap")
    mu = get_link(spec.mean_link).inverse(eta)
    phi = get_link(spec.precision_link).inverse(zeta)
    if spec.family not in ("normal", "cn") and np.any((mu <= 0.0) | (mu >= 1.0)):
        raise _RejectedStep("mean saturated the link")
    if np.any(phi <= 0.0) or not (np.isfinite(mu).all() and np.isfinite(phi).all()):
        raise _RejectedStep("non-finite or nonpositive precision")
    return eta, zeta, mu, phi


# ---------------------------------------------------------------------------
# Likelihoods and analytic scores

def _link_derivs(spec, eta, zeta):
    d1 = get_link(spec.mean_link).inverse_deriv(eta)
    d2 = get_link(spec.precision_link).inverse_deriv(zeta)
    return d1, d2


def _normal_ll_score(y, mu, sigma):
    t = (y - mu) / sigma
    ll = float(np.sum(-0.5 * t * t - 0.5 * math.log(2 * math.pi) - np.log(sigma)))
    dmu = t / sigma
    dsig = (t * t - 1.0) / sigma
    return ll, dmu, dsig


def _cn_ll_score(y, mu, sigma):
    """Two-limit tobit log-likelihood and derivatives wrt (mu, sigma)."""
    t = (y - mu) / sigma
    at0 = y == 0.0
    at1 = y == 1.0
    inner = ~(at0 | at1)
    ll_terms = np.empty_like(y)
    dmu = np.empty_like(y)
    dsig = np.empty_like(y)

    ti = t[inner]
    ll_terms[inner] = -0.5 * ti * ti - 0.5 * math.log(2 * math.pi) - np.log(sigma[inner])
    dmu[inner] = ti / sigma[inner]
    dsig[inner] = (ti * ti - 1.0) / sigma[inner]

    if at0.any():
        t0 = (0.0 - mu[at0]) / sigma[at0]
        logphi = -0.5 * t0 * t0 - 0.5 * math.log(2 * math.pi)
        logPhi = sp.log_ndtr(t0)
        ll_terms[at0] = logPhi
        mills = np.exp(logphi - logPhi)
        dmu[at0] = -mills / sigma[at0]
        dsig[at0] = -t0 * mills / sigma[at0]
    if at1.any():
        t1 = (1.0 - mu[at1]) / sigma[at1]
        logphi = -0.5 * t1 * t1 - 0.5 * math.log(2 * math.pi)
        logPhi = sp.log_ndtr(-t1)  # log(1 - Phi(t1))
        ll_terms[at1] = logPhi
        mills = np.exp(logphi - logPhi)
        dmu[at1] = mills / sigma[at1]
        dsig[at1] = t1 * mills / sigma[at1]
    return float(np.sum(ll_terms)), dmu, dsig


def _beta_ll_score(yprime, mu, phi, log_jacobian):
    """Beta log-likelihood at interior responses with a per-observation
    log-Jacobian offset; derivatives wrt (mu, phi)."""
    p = mu * phi
    q = (1.0 - mu) * phi
    ly = np.log(yprime)
    l1y = np.log1p(-yprime)
    ll = float(np.sum((p - 1) * ly + (q - 1) * l1y - sp.betaln(p, q) + log_jacobian))
    tbar = ly - sp.psi(p) + sp.psi(phi)
    ubar = l1y - sp.psi(q) + sp.psi(phi)
    dmu = phi * (tbar - ubar)
    dphi = mu * tbar + (1.0 - mu) * ubar
    return ll, dmu, dphi


def _xb_grid_logL(y, mu, phi, u_nodes):
    """(n, T) log XB likelihood contributions."""
    return xb_loglik_grid(y, mu, phi, np.asarray(u_nodes, dtype=float))


def _xb_grid_derivs(y, mu, phi, u_nodes, need=None):
    """Per-(observation, node) derivatives of log L wrt (mu, phi, u).

    need: optional boolean (n, T) mask; entries outside it are left 0
    (used to skip nodes whose mixture weight underflowed).
    Returns (dmu, dphi, du) arrays of shape (n, T).
    """
    y = np.asarray(y, dtype=float)
    u = np.asarray(u_nodes, dtype=float)
    n, T = y.size, u.size
    p = mu * phi
    q = (1.0 - mu) * phi
    one_p2u = 1.0 + 2.0 * u[None, :]
    dmu = np.zeros((n, T))
    dphi = np.zeros((n, T))
    du = np.zeros((n, T))
    if need is None:
        need = np.ones((n, T), dtype=bool)

    interior = (y > 0) & (y < 1)
    if interior.any():
        yi = y[interior, None]
        z = (yi + u[None, :]) / one_p2u
        pi = p[interior, None]
        qi = q[interior, None]
        phii = phi[interior, None]
        mui = mu[interior, None]
        tbar = np.log(z) - sp.psi(pi) + sp.psi(phii)
        ubar = np.log1p(-z) - sp.psi(qi) + sp.psi(phii)
        dmu[interior] = phii * (tbar - ubar)
        dphi[interior] = mui * tbar + (1.0 - mui) * ubar
        du[interior] = (
            (pi - 1.0) / (yi + u[None, :])
            + (qi - 1.0) / (1.0 - yi + u[None, :])
            - 2.0 * (phii - 1.0) / one_p2u
        )

    z0 = u / (1.0 + 2.0 * u)
    for boundary, left in ((y == 0.0, True), (y == 1.0, False)):
        if not boundary.any():
            continue
        rows = np.flatnonzero(boundary)
        mask = need[rows]
        ridx, tidx = np.nonzero(mask)
        if ridx.size == 0:
            continue
        pb = p[rows][ridx]
        qb = q[rows][ridx]
        zb = z0[tidx]
        # Mass at 0 is I_{z0}(p, q); mass at 1 is I_{z0}(q, p).
        a, b = (pb, qb) if left else (qb, pb)
        prob = sp.betainc(a, b, zb)
        da, db = inc_beta_param_derivs_robust(zb, a, b)
        if left:
            dmass_dmu = (da - db) * phi[rows][ridx]
            dmass_dphi = mu[rows][ridx] * da + (1.0 - mu[rows][ridx]) * db
        else:
            dmass_dmu = (db - da) * phi[rows][ridx]
            dmass_dphi = mu[rows][ridx] * db + (1.0 - mu[rows][ridx]) * da
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(prob > 0, 1.0 / prob, 0.0)
        # density of the parent beta at the censoring point, over the mass
        dens = np.exp(dist._beta_logpdf_core(zb, a, b))
        dmu_rows = np.zeros(mask.shape)
        dphi_rows = np.zeros(mask.shape)
        du_rows = np.zeros(mask.shape)
        dmu_rows[ridx, tidx] = dmass_dmu * inv
        dphi_rows[ridx, tidx] = dmass_dphi * inv
        du_rows[ridx, tidx] = dens * inv / (1.0 + 2.0 * u[tidx]) ** 2
        dmu[rows] = dmu_rows
        dphi[rows] = dphi_rows
        du[rows] = du_rows
    return dmu, dphi, du


def _loglik_core(spec: ModelSpec, data: Dataset, params: ParameterVector,
                 want_score: bool):
    """Log-likelihood and (optionally) the analytic score, one code path
    per family. Raises _RejectedStep for unevaluable parameter points."""
    eta, zeta, mu, phi = linear_predictors(spec, data, params)
    d1, d2 = _link_derivs(spec, eta, zeta)
    y = data.y
    xi_grad = None

    if spec.family == "normal":
        ll, dmu, dphi = _normal_ll_score(y, mu, phi)
    elif spec.family == "cn":
        ll, dmu, dphi = _cn_ll_score(y, mu, phi)
    elif spec.family == "beta":
        u = spec.effective_rescale_u(data.n)
        yprime = (y + u) / (1.0 + 2.0 * u)
        ll, dmu, dphi = _beta_ll_score(yprime, mu, phi, -math.log1p(2.0 * u))
    elif spec.family == "xb":
        grid = _xb_grid_logL(y, mu, phi, [spec.fixed_u])
        ll_terms = grid[:, 0]
        if not np.isfinite(ll_terms).all():
            raise _RejectedStep("zero XB likelihood contribution")
        ll = float(ll_terms.sum())
        if want_score:
            gmu, gphi, _ = _xb_grid_derivs(y, mu, phi, [spec.fixed_u])
            dmu, dphi = gmu[:, 0], gphi[:, 0]
    else:  # xbx
        if params.xi is None:
            raise DomainError("xbx family requires xi")
        nu = math.exp(params.xi)
        rule = gauss_laguerre(spec.quad_order)
        u_nodes = nu * rule.nodes
        grid = _xb_grid_logL(y, mu, phi, u_nodes)
        logw = np.log(rule.weights)[None, :] + grid
        m = np.max(logw, axis=1)
        if not np.isfinite(m).all():
            raise _RejectedStep("zero mixture likelihood contribution")
        w = np.exp(logw - m[:, None])
        s = w.sum(axis=1)
        ll = float(np.sum(m + np.log(s)))
        if want_score:
            w /= s[:, None]
            need = w > 1e-16
            gmu, gphi, gu = _xb_grid_derivs(y, mu, phi, u_nodes, need=need)
            dmu = np.sum(w * gmu, axis=1)
            dphi = np.sum(w * gphi, axis=1)
            xi_grad = float(np.sum(w * gu * u_nodes[None, :]))

    if not want_score:
        return ll, None
    gbeta = data.X.T @ (d1 * dmu)
    ggamma = data.Z.T @ (d2 * dphi)
    parts = [gbeta, ggamma]
    if spec.has_xi:
        parts.append([xi_grad])
    return ll, np.concatenate(parts)


def loglik(spec: ModelSpec, data: Dataset, params: ParameterVector) -> float:
    """Exact log-likelihood (approximate for the mixture family)."""
    return _loglik_core(spec, data, params, want_score=False)[0]


def score(spec: ModelSpec, data: Dataset, params: ParameterVector) -> np.ndarray:
    """Analytic gradient of the log-likelihood in (beta, gamma[, xi])."""
    return _loglik_core(spec, data, params, want_score=True)[1]


def loglik_xbx(params: ParameterVector, data: Dataset, rule=None) -> float:
    spec = ModelSpec(family="xbx",
                     quad_order=rule.order if rule is not None else DEFAULT_ORDER)
    return loglik(spec, data, params)


def score_xbx(params: ParameterVector, data: Dataset, rule=None) -> np.ndarray:
    spec = ModelSpec(family="xbx",
                     quad_order=rule.order if rule is not None else DEFAULT_ORDER)
    return score(spec, data, params)


def qrh_functions(z: float, mu: float, phi: float):
    """Auxiliary boundary-gradient functions (q, r, h) at one point.

    q is the derivative of the beta cdf F(z | mu, phi) in its first shape
    parameter, r the derivative in the second, h the hypergeometric factor
    entering q. Raises ConvergenceError if the series cannot deliver them.
    """
    from .special import h_factor
    from .errors import ConvergenceError

    if not (0.0 < z < 1.0):
        raise DomainError(f"z must be in (0, 1), got {z}")
    p = mu * phi
    q_shape = (1.0 - mu) * phi
    from .special import inc_beta_param_derivs

    dp, dq, ok = inc_beta_param_derivs(z, p, q_shape)
    if not bool(np.all(ok)):
        raise ConvergenceError("series for the incomplete-beta parameter "
                               f"derivatives failed at z={z}, mu={mu}, phi={phi}")
    h, okh = h_factor(np.asarray(z), np.asarray(p), np.asarray(q_shape))
    if not bool(np.all(okh)):
        raise ConvergenceError(f"hypergeometric factor failed at z={z}")
    return float(dp), float(dq), float(h)


# ---------------------------------------------------------------------------
# Fitting

@dataclass
class FitOptions:
    max_iter: int = 500
    grad_tol: float = 1e-6      # scaled: tol * (1 + |loglik|)
    start: ParameterVector | None = None


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    data: Dataset
    params: ParameterVector
    vcov: np.ndarray | None
    loglik: float
    aic: float
    bic: float
    converged: bool
    iterations: int
    gradient_norm: float
    message: str = ""

    @property
    def theta(self):
        return self.params.pack()

    @property
    def n_params(self):
        return self.theta.size

    @property
    def coef_names(self):
        names = [f"mu:{c}" for c in self.data.x_names]
        names += [f"precision:{c}" for c in self.data.z_names]
        if self.spec.has_xi:
            names.append("log_nu")
        return names

    @property
    def stderr(self):
        if self.vcov is None:
            return None
        return np.sqrt(np.clip(np.diag(self.vcov), 0.0, None))

    @property
    def nu(self):
        return math.exp(self.params.xi) if self.spec.has_xi else None

    def fitted_parameters(self, X=None, Z=None):
        """(mu_i, phi_i) on the response scale for the fit or new designs."""
        X = self.data.X if X is None else np.asarray(X, dtype=float)
        Z = self.data.Z if Z is None else np.asarray(Z, dtype=float)
        if X.shape[1] != self.data.X.shape[1] or Z.shape[1] != self.data.Z.shape[1]:
            raise ShapeError("new design has the wrong number of columns")
        mu = get_link(self.spec.mean_link).inverse(X @ self.params.beta)
        phi = get_link(self.spec.precision_link).inverse(Z @ self.params.gamma)
        return mu, phi

    def row_distributions(self, X=None, Z=None):
        """Per-row fitted distribution objects."""
        mu, phi = self.fitted_parameters(X, Z)
        fam = self.spec.family
        if fam == "normal":
            return [dist.Normal(m, s) for m, s in zip(mu, phi)]
        if fam == "cn":
            return [dist.CensoredNormal(m, s) for m, s in zip(mu, phi)]
        if fam == "beta":
            return [dist.Beta(m, f) for m, f in zip(mu, phi)]
        if fam == "xb":
            return [dist.XB(m, f, self.spec.fixed_u) for m, f in zip(mu, phi)]
        nu = self.nu
        return [dist.XBX(m, f, nu, self.spec.quad_order) for m, f in zip(mu, phi)]


def start_values(spec: ModelSpec, data: Dataset) -> ParameterVector:
    """Least-squares start for beta, moment start for the precision."""
    n = data.n
    yc = np.clip(data.y, 0.5 / n, 1.0 - 0.5 / n)
    g1 = get_link(spec.mean_link).forward
    target = g1(yc)
    beta, *_ = np.linalg.lstsq(data.X, target, rcond=None)
    fitted = get_link(spec.mean_link).inverse(data.X @ beta)
    resid = yc - fitted
    s2 = max(float(np.var(resid)), 1e-6)
    if spec.family in ("normal", "cn"):
        phi0 = math.sqrt(s2)
    else:
        vbar = float(np.mean(fitted * (1.0 - fitted)))
        phi0 = max(vbar / s2 - 1.0, 0.5)
    gamma = np.zeros(data.Z.shape[1])
    gamma[0] = get_link(spec.precision_link).forward(phi0)
    xi = math.log(0.1) if spec.has_xi else None
    return ParameterVector(beta, gamma, xi)


def _objective(spec, data, p, q):
    def fun(theta):
        params = ParameterVector.unpack(theta, p, q, spec.has_xi)
        try:
            ll, g = _loglik_core(spec, data, params, want_score=True)
        except _RejectedStep:
            return np.inf, np.zeros(theta.size)
        if not np.isfinite(ll) or not np.isfinite(g).all():
            return np.inf, np.zeros(theta.size)
        return -ll, -g
    return fun


def fit(spec: ModelSpec, data: Dataset, options: FitOptions | None = None) -> FitResult:
    """Maximum (approximate) likelihood fit with analytic gradients.

    Quasi-Newton (BFGS) on the unconstrained scale, with an L-BFGS-B
    polish when the first pass stalls short of the gradient tolerance.
    """
    options = options or FitOptions()
    p, q = data.X.shape[1], data.Z.shape[1]
    theta0 = (options.start or start_values(spec, data)).pack()
    fun = _objective(spec, data, p, q)

    res = optimize.minimize(fun, theta0, jac=True, method="BFGS",
                            options={"maxiter": options.max_iter, "gtol": 1e-8})
    iterations = int(res.nit)
    theta = res.x
    ll = -float(res.fun)
    gnorm = float(np.max(np.abs(res.jac)))
    if gnorm > options.grad_tol * (1.0 + abs(ll)):
        res2 = optimize.minimize(fun, theta, jac=True, method="L-BFGS-B",
                                 options={"maxiter": options.max_iter,
                                          "ftol": 1e-14, "gtol": 1e-10})
        if -float(res2.fun) >= ll:
            theta, ll = res2.x, -float(res2.fun)
            gnorm = float(np.max(np.abs(res2.jac)))
            iterations += int(res2.nit)

    converged = bool(np.isfinite(ll)) and gnorm <= options.grad_tol * (1.0 + abs(ll))
    if not np.isfinite(ll):
        raise FitError(f"optimizer failed: {res.message}")

    params = ParameterVector.unpack(theta, p, q, spec.has_xi)
    hess = observed_hessian(spec, data, params)
    vcov = None
    message = "" if converged else "gradient tolerance not reached"
    try:
        vcov = np.linalg.inv(-hess)
        vcov = 0.5 * (vcov + vcov.T)
        if np.any(np.diag(vcov) < 0):
            vcov = None
            message = (message + "; " if message else "") + "negative variance estimate"
    except np.linalg.LinAlgError:
        message = (message + "; " if message else "") + "singular observed information"

    k = theta.size
    aic = -2.0 * ll + 2.0 * k
    bic = -2.0 * ll + math.log(data.n) * k
    return FitResult(spec=spec, data=data, params=params, vcov=vcov, loglik=ll,
                     aic=aic, bic=bic, converged=converged, iterations=iterations,
                     gradient_norm=gnorm, message=message)


def observed_hessian(spec: ModelSpec, data: Dataset, params: ParameterVector):
    """Hessian of the log-likelihood by central differences of the analytic
    score, steps 1e-5 (1 + |theta_j|), symmetrized."""
    theta = params.pack()
    p, q = data.X.shape[1], data.Z.shape[1]
    k = theta.size
    H = np.empty((k, k))

    def grad_at(th):
        return score(spec, data, ParameterVector.unpack(th, p, q, spec.has_xi))

    for j in range(k):
        h = 1e-5 * (1.0 + abs(theta[j]))
        tp = theta.copy(); tp[j] += h
        tm = theta.copy(); tm[j] -= h
        H[:, j] = (grad_at(tp) - grad_at(tm)) / (2.0 * h)
    return 0.5 * (H + H.T)


# ---------------------------------------------------------------------------
# Serialization

def fit_to_json(fit_result: FitResult) -> str:
    """Self-describing JSON artifact for a fitted model."""
    import json

    spec = fit_result.spec
    payload = {
        "family": spec.family,
        "links": {"mean": spec.mean_link, "precision": spec.precision_link},
        "coefficients": {
            "names": list(fit_result.coef_names),
            "estimates": fit_result.theta.tolist(),
            "stderr": (None if fit_result.stderr is None
                       else fit_result.stderr.tolist()),
        },
        "vcov": None if fit_result.vcov is None else fit_result.vcov.ravel().tolist(),
        "loglik": fit_result.loglik,
        "aic": fit_result.aic,
        "bic": fit_result.bic,
        "n": fit_result.data.n,
        "n_mean_columns": fit_result.data.X.shape[1],
        "n_precision_columns": fit_result.data.Z.shape[1],
        "converged": fit_result.converged,
        "iterations": fit_result.iterations,
        "gradient_norm": fit_result.gradient_norm,
        "message": fit_result.message,
        "quad_order": spec.quad_order,
        "rescale_u": spec.rescale_u,
        "fixed_u": spec.fixed_u,
    }
    if spec.has_xi:
        payload["nu"] = fit_result.nu
    return json.dumps(payload, indent=2)


def fit_from_json(text: str, data: Dataset) -> FitResult:
    """Rebuild a FitResult from its JSON artifact against a dataset whose
    designs are column-compatible with the original fit."""
    import json

    doc = json.loads(text)
    p = doc["n_mean_columns"]
    q = doc["n_precision_columns"]
    if data.X.shape[1] != p or data.Z.shape[1] != q:
        raise ShapeError(
            f"artifact expects designs with ({p}, {q}) columns, data has "
            f"({data.X.shape[1]}, {data.Z.shape[1]})"
        )
    spec = ModelSpec(family=doc["family"], mean_link=doc["links"]["mean"],
                     precision_link=doc["links"]["precision"],
                     quad_order=doc["quad_order"], rescale_u=doc["rescale_u"],
                     fixed_u=doc["fixed_u"])
    theta = np.asarray(doc["coefficients"]["estimates"], dtype=float)
    params = ParameterVector.unpack(theta, p, q, spec.has_xi)
    k = theta.size
    vcov = (None if doc["vcov"] is None
            else np.asarray(doc["vcov"], dtype=float).reshape(k, k))
    return FitResult(spec=spec, data=data, params=params, vcov=vcov,
                     loglik=doc["loglik"], aic=doc["aic"], bic=doc["bic"],
                     converged=doc["converged"], iterations=doc["iterations"],
                     gradient_norm=doc["gradient_norm"],
                     message=doc.get("message", ""))


# ---------------------------------------------------------------------------
# Prediction

PREDICT_TARGETS = ("mean", "params", "p_above", "p_below", "cdf_at")


def predict(fit_result: FitResult, X=None, Z=None, targets=("mean",),
            threshold: float = 0.95):
    """Per-row predictions for the requested targets.

    mean: expectation of the observable response (censored mean for the
    bounded families, the latent mean for the plain normal).
    p_above / p_below / cdf_at use the threshold argument.
    """
    for t in targets:
        if t not in PREDICT_TARGETS:
            raise DomainError(f"unknown predict target {t!r}")
    dists = fit_result.row_distributions(X, Z)
    mu, phi = fit_result.fitted_parameters(X, Z)
    out = {}
    if "mean" in targets:
        if fit_result.spec.family == "normal":
            out["mean"] = mu.copy()
        else:
            out["mean"] = np.array([dist.censored_mean(d) for d in dists])
    if "params" in targets:
        out["mu"] = mu
        out["phi" if fit_result.spec.family not in ("normal", "cn") else "sigma"] = phi
        if fit_result.spec.has_xi:
            out["nu"] = np.full(mu.size, fit_result.nu)
    if "p_above" in targets:
        out["p_above"] = np.array([1.0 - float(np.asarray(d.cdf(threshold)).reshape(-1)[0])
                                   for d in dists])
    if "p_below" in targets:
        # strict inequality: P(Y < t) excludes any point mass sitting at t
        def _below(d):
            F = float(np.asarray(d.cdf(threshold)).reshape(-1)[0])
            if threshold >= 1.0:
                F -= d.p1
            if threshold <= 0.0:
                F -= d.p0
            return F
        out["p_below"] = np.array([_below(d) for d in dists])
    if "cdf_at" in targets:
        out["cdf_at"] = np.array([float(np.asarray(d.cdf(threshold)).reshape(-1)[0])
                                  for d in dists])
    return out
