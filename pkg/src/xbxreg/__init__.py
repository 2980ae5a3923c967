"""Regression for bounded responses with boundary observations.

Beta, censored four-parameter beta (XB), and exponential-mixture (XBX)
distributions and regression models, alongside normal and two-limit tobit
baselines, with CRPS scoring, rootogram diagnostics, and a simulation
harness.
"""

from .dist import (XB, XBX, B4, Beta, CensoredNormal, Normal, censored_mean,
                   quantile, sample_xb, sample_xbx, xb_cdf, xb_logpdf,
                   xbx_cdf, xbx_latent_moments, xbx_pdf)
from .errors import (ConvergenceError, DataError, DomainError, FitError,
                     InvalidOrderError, NestingError, ShapeError,
                     SingularityError, XbxError)
from .infer import (LinearHypothesis, TestResult, information_criteria,
                    lr_test, wald_test, zero_restrictions)
from .kernels import BACKEND as kernel_backend
from .model import (Dataset, FitOptions, FitResult, ModelSpec,
                    ParameterVector, fit, fit_from_json, fit_to_json, loglik,
                    predict, score as model_score)
from .quad import DEFAULT_ORDER, QuadratureRule, gauss_laguerre
from .score import RootogramTable, crps, rootogram, total_score
from .sim import SimResult, SimSetting, implied_coefficients, run_comparison

__version__ = "0.1.0"
