"""Deformed factorial, deformed exponential series and the modulus function.

The deformed factorial obeys ``gamma_mu(0) = 1`` and
``gamma_mu(n) = (n + 2*mu*theta(n)) * gamma_mu(n - 1)`` where ``theta`` is
the indicator of odd integers; at ``mu = 0`` it is ``n!``. The deformed
exponential is ``sum_n z**n / gamma_mu(n)``.

Accuracy of :func:`exp_mu_series` is guaranteed for ``|z| <= 50``. Larger
arguments still evaluate, but no tolerance is promised there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _dd
from .errors import ConvergenceError, DomainError, GammaOverflowError

__all__ = [
    "MuParam",
    "SeriesSpec",
    "theta",
    "gamma_mu",
    "log_gamma_mu",
    "exp_mu_series",
    "phi",
    "mu_value",
]

ACCURACY_RADIUS = 50.0


@dataclass(frozen=True)
class MuParam:
    """Deformation parameter, constrained to ``value > -1/2``."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v <= -0.5:
            raise DomainError(f"mu must exceed -1/2 (got {self.value!r})")
        object.__setattr__(self, "value", v)

    def __float__(self):
        return self.value


def mu_value(mu) -> float:
    """Validate ``mu`` (a float or :class:`MuParam`) and return it as a float."""
    if isinstance(mu, MuParam):
        return mu.value
    return MuParam(mu).value


@dataclass(frozen=True)
class SeriesSpec:
    """Truncation controls for the exponential series."""

    rel_tol: float = 1e-15
    max_terms: int = 10000

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise DomainError("rel_tol must lie in (0, 1)")
        if self.max_terms < 16:
            raise DomainError("max_terms must be at least 16")


DEFAULT_SERIES = SeriesSpec()


def theta(n: int) -> int:
    """Indicator of the odd integers on n >= 0."""
    if n < 0:
        raise DomainError(f"theta is defined for n >= 0 (got {n})")
    return n & 1


def gamma_mu(mu, n: int) -> float:
    """Deformed factorial by direct recursion.

    Raises GammaOverflowError once the product leaves the double range;
    ``n`` of about 170 already does so at ``mu = 0``.
    """
    m = mu_value(mu)
    if n < 0:
        raise DomainError(f"n must be non-negative (got {n})")
    g = 1.0
    for k in range(1, n + 1):
        g *= k + 2.0 * m * (k & 1)
        if math.isinf(g):
            raise GammaOverflowError(f"gamma_mu({m}, {n}) overflows; use log_gamma_mu")
    return g


def log_gamma_mu(mu, n: int) -> float:
    """Natural log of the deformed factorial, safe for any n."""
    m = mu_value(mu)
    if n < 0:
        raise DomainError(f"n must be non-negative (got {n})")
    return math.fsum(math.log(k + 2.0 * m * (k & 1)) for k in range(1, n + 1))


def exp_mu_series(mu, z, spec: SeriesSpec = DEFAULT_SERIES) -> complex:
    """Sum the deformed exponential series at complex ``z``.

    Terms are generated by the ratio ``z / (n + 2*mu*theta(n))`` and both
    the terms and the running sum are carried in double-double, so the
    cancellation between large alternating terms (imaginary ``z``,
    ``mu < 0``) costs no accuracy. Summation stops at the first index where
    three consecutive terms have magnitude at most ``rel_tol * |partial sum|``.
    """
    m = mu_value(mu)
    z = complex(z)
    a, b = z.real, z.imag
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("z must be finite")
    if a == 0.0 and b == 0.0:
        return 1.0 + 0.0j

    two_mu = 2.0 * m
    # current term t = (trh + trl) + i (tih + til), running sum s likewise
    trh, trl, tih, til = 1.0, 0.0, 0.0, 0.0
    srh, srl, sih, sil = 1.0, 0.0, 0.0, 0.0
    small = 0
    for n in range(1, spec.max_terms + 1):
        # t *= z
        p1h, p1l = _dd.mul_d(trh, trl, a)
        p2h, p2l = _dd.mul_d(tih, til, b)
        q1h, q1l = _dd.mul_d(trh, trl, b)
        q2h, q2l = _dd.mul_d(tih, til, a)
        trh, trl = _dd.add(p1h, p1l, -p2h, -p2l)
        tih, til = _dd.add(q1h, q1l, q2h, q2l)
        # t /= n + 2 mu theta(n), with the denominator held exactly
        if n & 1:
            dh, dl = _dd.two_sum(float(n), two_mu)
        else:
            dh, dl = float(n), 0.0
        trh, trl = _dd.div(trh, trl, dh, dl)
        tih, til = _dd.div(tih, til, dh, dl)
        srh, srl = _dd.add(srh, srl, trh, trl)
        sih, sil = _dd.add(sih, sil, tih, til)

        tmag = math.hypot(trh, tih)
        if not math.isfinite(tmag) or not math.isfinite(srh + sih):
            raise ConvergenceError(f"exp_mu series overflowed at |z| = {abs(z):g}")
        # <= so exactly-zero (underflowed) terms count as small near a root
        if tmag <= spec.rel_tol * math.hypot(srh, sih):
            small += 1
            if small == 3:
                return complex(srh + srl, sih + sil)
        else:
            small = 0
    raise ConvergenceError(
        f"exp_mu series did not converge in {spec.max_terms} terms at |z| = {abs(z):g}"
    )


def phi(mu, x: float, spec: SeriesSpec = DEFAULT_SERIES) -> float:
    """Squared modulus ``|exp_mu(i x)|**2`` on the real line, via the series."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("x must be finite")
    w = exp_mu_series(mu, complex(0.0, x), spec)
    return w.real * w.real + w.imag * w.imag
