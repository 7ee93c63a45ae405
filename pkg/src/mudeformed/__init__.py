"""Special functions, exact identities and trace integrals of mu-deformed quantum mechanics."""

__version__ = "0.1.0"

from .bessel import bessel_j, exp_mu_bessel, gamma_fn, phi_bessel, phi_derivative
from .combinatorics import (
    Identity,
    IdentityReport,
    RationalMu,
    binom_mu,
    gamma_mu_exact,
    p_alternating_closed,
    p_poly,
    verify_all,
    verify_identity,
)
from .core import MuParam, SeriesSpec, exp_mu_series, gamma_mu, log_gamma_mu, phi, theta
from .errors import ConvergenceError, DomainError, GammaOverflowError, MuDeformedError
from .quadrature import (
    IntervalSet,
    QuadratureSpec,
    TraceReport,
    Verdict,
    measure_mu,
    sweep_mu,
    trace_integral,
)

__all__ = [
    "MuParam", "SeriesSpec", "theta", "gamma_mu", "log_gamma_mu", "exp_mu_series", "phi",
    "gamma_fn", "bessel_j", "exp_mu_bessel", "phi_bessel", "phi_derivative",
    "RationalMu", "Identity", "IdentityReport", "gamma_mu_exact", "binom_mu", "p_poly",
    "p_alternating_closed", "verify_identity", "verify_all",
    "IntervalSet", "QuadratureSpec", "TraceReport", "Verdict", "measure_mu", "trace_integral", "sweep_mu",
    "MuDeformedError", "DomainError", "GammaOverflowError", "ConvergenceError",
]
