"""Hypothesis tests and information criteria for fitted models.

Likelihood-ratio and Wald tests for nested comparisons and general linear
restrictions R theta = r, plus AIC/BIC extraction.
"""

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import DomainError, NestingError, ShapeError, SingularityError
from .model import FitResult
from .special import chi2_sf


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest collection target

    kind: str            # "lr" or "wald"
    statistic: float
    df: int
    p_value: float
    description: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @staticmethod
    def from_json(text: str) -> "TestResult":
        return TestResult(**json.loads(text))


@dataclass(frozen=True)
class LinearHypothesis:
    """Restriction R theta = r on the packed coefficient vector."""
    R: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        r = np.atleast_1d(np.asarray(self.r, dtype=float))
        if R.shape[0] != r.size:
            raise ShapeError("row count of R must match length of r")
        if np.linalg.matrix_rank(R) < R.shape[0]:
            raise DomainError("restriction matrix R must have full row rank")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "r", r)

    @property
    def df(self):
        return self.R.shape[0]


def zero_restrictions(fit: FitResult, names) -> LinearHypothesis:
    """Hypothesis that the named (beta, gamma) coefficients are jointly zero."""
    all_names = fit.coef_names
    k = len(all_names) - (1 if fit.spec.has_xi else 0)
    rows = []
    for nm in names:
        if nm not in all_names[:k]:
            raise DomainError(f"unknown coefficient {nm!r}; have {all_names[:k]}")
        e = np.zeros(k)
        e[all_names.index(nm)] = 1.0
        rows.append(e)
    return LinearHypothesis(np.array(rows), np.zeros(len(rows)))


def wald_test(fit: FitResult, hypothesis: LinearHypothesis) -> TestResult:
    """Wald chi-squared test of R theta = r using the observed information.

    Restrictions act on the (beta, gamma) block; the mixing parameter is
    excluded from the hypothesis space but kept in the covariance.
    """
    if fit.vcov is None:
        raise SingularityError("fit has no covariance matrix; Wald test unavailable")
    R, r = hypothesis.R, hypothesis.r
    if fit.spec.has_xi and R.shape[1] == fit.n_params - 1:
        R = np.hstack([R, np.zeros((R.shape[0], 1))])
    if R.shape[1] != fit.n_params:
        raise ShapeError(
            f"R has {R.shape[1]} columns but the fit has {fit.n_params} parameters"
        )
    diff = R @ fit.theta - r
    middle = R @ fit.vcov @ R.T
    try:
        sol = np.linalg.solve(middle, diff)
    except np.linalg.LinAlgError:
        raise SingularityError("restricted covariance block is singular") from None
    stat = float(diff @ sol)
    df = hypothesis.df
    return TestResult("wald", stat, df, chi2_sf(stat, df),
                      description=f"Wald test of {df} linear restriction(s)")


def lr_test(full: FitResult, reduced: FitResult) -> TestResult:
    """Likelihood-ratio test of a reduced model against a full model.

    The reduced model must be of the same family, fitted to the same
    response, with no more parameters. Tiny negative statistics (within
    -1e-4, optimizer slack) are clamped to zero silently; larger negatives
    are clamped with a warning in the description, since they indicate a
    suspect restricted fit.
    """
    if full.spec.family != reduced.spec.family:
        raise NestingError(
            f"families differ ({full.spec.family!r} vs {reduced.spec.family!r})"
        )
    if reduced.n_params > full.n_params:
        raise NestingError(
            f"reduced model has {reduced.n_params} parameters, full has "
            f"{full.n_params}"
        )
    if full.data.n != reduced.data.n or not np.array_equal(full.data.y, reduced.data.y):
        raise NestingError("models were fitted to different responses")
    stat = 2.0 * (full.loglik - reduced.loglik)
    note = f"likelihood ratio test, {full.n_params - reduced.n_params} df"
    if stat < 0.0:
        if stat < -1e-4:
            note += f"; warning: negative statistic {stat:.6g}, restricted fit suspect"
        stat = 0.0
    df = full.n_params - reduced.n_params
    if df == 0:
        return TestResult("lr", float(stat), 0, 1.0, description=note)
    return TestResult("lr", float(stat), df, chi2_sf(stat, df), description=note)


def information_criteria(fit: FitResult) -> dict:
    """{'loglik', 'aic', 'bic', 'n_params', 'n_obs'} for a fitted model."""
    return {
        "loglik": fit.loglik,
        "aic": fit.aic,
        "bic": fit.bic,
        "n_params": fit.n_params,
        "n_obs": fit.data.n,
    }
