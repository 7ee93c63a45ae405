"""Exact deformed binomial coefficients, binomial polynomials and their identities.

All arithmetic is done with :class:`fractions.Fraction`, so every identity
check is a literal equality test. The deformation parameter is restricted to
rationals here; each identity is a polynomial identity in ``mu`` at fixed
``n``, so rational sweeps are verification, not proof.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .errors import DomainError

__all__ = [
    "RationalMu",
    "Identity",
    "IdentityReport",
    "Counterexample",
    "gamma_mu_exact",
    "binom_mu",
    "p_poly",
    "p_alternating_closed",
    "closed_4n",
    "closed_4n_minus_2",
    "verify_identity",
    "verify_all",
    "parse_rational",
    "DEFAULT_MU_SET",
    "DEFAULT_XY_GRID",
]

HALF = Fraction(1, 2)


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, an integer string, an int, or a Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, str):
        s = text.strip()
        # Fraction() also accepts decimals like "0.5"; this world is p/q only
        if not s or any(c in s for c in ".eE"):
            raise DomainError(f"malformed rational {text!r}; expected p/q")
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"malformed rational {text!r}; expected p/q") from None
    raise DomainError(f"cannot interpret {text!r} as a rational")


@dataclass(frozen=True)
class RationalMu:
    """Exact deformation parameter with ``value > -1/2``."""

    value: Fraction

    def __post_init__(self):
        v = parse_rational(self.value)
        if v <= -HALF:
            raise DomainError(f"mu must exceed -1/2 (got {v})")
        object.__setattr__(self, "value", v)

    def __str__(self):
        return str(self.value)


def _mu(mu) -> Fraction:
    if isinstance(mu, RationalMu):
        return mu.value
    return RationalMu(parse_rational(mu)).value


@lru_cache(maxsize=256)
def _gamma_table(mu: Fraction, n: int) -> tuple:
    g = [Fraction(1)]
    for k in range(1, n + 1):
        g.append(g[-1] * (k + 2 * mu * (k & 1)))
    return tuple(g)


def _gammas(mu: Fraction, n: int) -> tuple:
    # grow in blocks so repeated calls share one cached table
    size = max(64, 1 << max(n, 1).bit_length())
    return _gamma_table(mu, size)


def gamma_mu_exact(mu, n: int) -> Fraction:
    """Exact deformed factorial."""
    if n < 0:
        raise DomainError(f"n must be non-negative (got {n})")
    return _gammas(_mu(mu), n)[n]


@lru_cache(maxsize=1 << 16)
def _binom(mu: Fraction, n: int, k: int) -> Fraction:
    if k < 0 or k > n:
        return Fraction(0)
    g = _gammas(mu, n)
    return g[n] / (g[n - k] * g[k])


def binom_mu(mu, n: int, k: int) -> Fraction:
    """Deformed binomial coefficient; zero outside ``0 <= k <= n``."""
    if n < 0:
        raise DomainError(f"n must be non-negative (got {n})")
    return _binom(_mu(mu), n, k)


@lru_cache(maxsize=1 << 14)
def _p(mu: Fraction, n: int, x: Fraction, y: Fraction) -> Fraction:
    xs = [Fraction(1)]
    ys = [Fraction(1)]
    for _ in range(n):
        xs.append(xs[-1] * x)
        ys.append(ys[-1] * y)
    return sum((_binom(mu, n, k) * xs[k] * ys[n - k] for k in range(n + 1)), Fraction(0))


def p_poly(mu, n: int, x, y) -> Fraction:
    """Deformed binomial polynomial ``sum_k binom_mu(n, k) x**k y**(n-k)``."""
    if n < 0:
        raise DomainError(f"n must be non-negative (got {n})")
    return _p(_mu(mu), n, Fraction(x), Fraction(y))


def _prod(factors: Iterable[Fraction]) -> Fraction:
    out = Fraction(1)
    for f in factors:
        out *= f
    return out


def p_alternating_closed(mu, n: int) -> Fraction:
    """Closed form of ``p_{2n}(1, -1)``.

    ``2**(2n) mu / (n + mu) * prod_{k=1..n} (k + mu) / (k + 2 mu)``, with
    ``mu / (n + mu)`` read as 1 when ``n = mu = 0``.
    """
    m = _mu(mu)
    if n < 0:
        raise DomainError(f"n must be non-negative (got {n})")
    ratio = Fraction(1) if n == 0 and m == 0 else m / (n + m)
    return 4**n * ratio * _prod((k + m) / (k + 2 * m) for k in range(1, n + 1))


def closed_4n(mu, n: int) -> Fraction:
    """``p_{4n}(1, -1)`` as ``mu 2**(2n) prod_{n<k<2n} (mu+k) / prod_{k<=n} (mu+k-1/2)``, n >= 1."""
    m = _mu(mu)
    if n < 1:
        raise DomainError("closed_4n needs n >= 1")
    num = _prod(m + k for k in range(n + 1, 2 * n))
    den = _prod(m + k - HALF for k in range(1, n + 1))
    return m * 4**n * num / den


def closed_4n_minus_2(mu, n: int) -> Fraction:
    """``p_{4n-2}(1, -1)`` as ``mu 2**(2n-1) prod_{n<k<2n} (mu+k-1) / prod_{k<=n} (mu+k-1/2)``, n >= 1."""
    m = _mu(mu)
    if n < 1:
        raise DomainError("closed_4n_minus_2 needs n >= 1")
    num = _prod(m + k - 1 for k in range(n + 1, 2 * n))
    den = _prod(m + k - HALF for k in range(1, n + 1))
    return m * 2 ** (2 * n - 1) * num / den


class Identity(str, enum.Enum):
    PASCAL_EVEN = "PASCAL_EVEN"
    PASCAL_ODD = "PASCAL_ODD"
    PRODUCT_EVEN = "PRODUCT_EVEN"
    PRODUCT_ODD = "PRODUCT_ODD"
    ODD_VANISH = "ODD_VANISH"
    SUM_FORM_4_6 = "SUM_FORM_4_6"
    CLOSED_2_6 = "CLOSED_2_6"
    CLOSED_4_8 = "CLOSED_4_8"
    CLOSED_4_9 = "CLOSED_4_9"
    SYMMETRY = "SYMMETRY"
    EVEN_ONES_2_11 = "EVEN_ONES_2_11"
    RATIO_2_8 = "RATIO_2_8"
    DOUBLING_2_9 = "DOUBLING_2_9"
    RATIO_2_10 = "RATIO_2_10"


@dataclass(frozen=True)
class Counterexample:
    n: int
    k: Optional[int]
    mu: Fraction
    lhs: Fraction
    rhs: Fraction
    xy: Optional[tuple] = None


@dataclass(frozen=True)
class Case:
    """One evaluated instance of an identity."""

    n: int
    k: Optional[int]
    xy: Optional[tuple]
    lhs: Fraction
    rhs: Fraction


@dataclass
class IdentityReport:
    identity_id: Identity
    n_range: tuple
    mu_set: list
    passed: bool
    counterexample: Optional[Counterexample] = None
    cases_checked: int = 0
    cases: list = field(default_factory=list, repr=False)

    def to_dict(self, include_cases: bool = False) -> dict:
        d = {
            "identity_id": self.identity_id.value,
            "n_range": list(self.n_range),
            "mu_set": [str(m) for m in self.mu_set],
            "passed": self.passed,
            "cases_checked": self.cases_checked,
            "counterexample": None,
        }
        c = self.counterexample
        if c is not None:
            d["counterexample"] = {
                "n": c.n,
                "k": c.k,
                "mu": str(c.mu),
                "lhs": str(c.lhs),
                "rhs": str(c.rhs),
                "xy": None if c.xy is None else [str(v) for v in c.xy],
            }
        if include_cases:
            d["cases"] = [
                {"mu": str(mu), "n": cs.n, "k": cs.k, "lhs": str(cs.lhs), "rhs": str(cs.rhs)}
                for mu, cs in self.cases
            ]
        return d


# Each checker yields Case objects for one (mu, n).

def _pascal_even(mu, n, xy):
    for k in range(-2, 2 * n + 4):
        yield Case(n, k, None, _binom(mu, 2 * n, k - 1) + _binom(mu, 2 * n, k), _binom(mu, 2 * n + 1, k))


def _pascal_odd(mu, n, xy):
    for k in range(-2, 2 * n + 4):
        lhs = _binom(mu, 2 * n + 1, k - 1) + _binom(mu, 2 * n + 1, k)
        rhs = (1 + 2 * mu * (k % 2) / (n + 1)) * _binom(mu, 2 * n + 2, k)
        yield Case(n, k, None, lhs, rhs)


def _product_even(mu, n, xy):
    for x, y in xy:
        yield Case(n, None, (x, y), _p(mu, 1, x, y) * _p(mu, 2 * n, x, y), _p(mu, 2 * n + 1, x, y))


def _product_odd(mu, n, xy):
    for x, y in xy:
        lhs = _p(mu, 1, x, y) * _p(mu, 2 * n + 1, x, y)
        odd = sum(
            (_binom(mu, 2 * n + 2, 2 * k + 1) * x ** (2 * k + 1) * y ** (2 * n + 1 - 2 * k) for k in range(n + 1)),
            Fraction(0),
        )
        rhs = _p(mu, 2 * n + 2, x, y) + 2 * mu / (n + 1) * odd
        yield Case(n, None, (x, y), lhs, rhs)


def _odd_vanish(mu, n, xy):
    yield Case(n, None, None, _p(mu, 2 * n + 1, Fraction(1), Fraction(-1)), Fraction(0))


def _sum_form(mu, n, xy):
    s = sum((_binom(mu, 2 * n, 2 * k + 1) for k in range(n)), Fraction(0))
    yield Case(n, None, None, _p(mu, 2 * n, Fraction(1), Fraction(-1)), 2 * mu / n * s)


def _closed_2_6(mu, n, xy):
    yield Case(n, None, None, _p(mu, 2 * n, Fraction(1), Fraction(-1)), p_alternating_closed(mu, n))


def _closed_4_8(mu, n, xy):
    yield Case(n, None, None, _p(mu, 4 * n, Fraction(1), Fraction(-1)), closed_4n(mu, n))


def _closed_4_9(mu, n, xy):
    yield Case(n, None, None, _p(mu, 4 * n - 2, Fraction(1), Fraction(-1)), closed_4n_minus_2(mu, n))


def _symmetry(mu, n, xy):
    for k in range(-2, n + 3):
        yield Case(n, k, None, _binom(mu, n, k), _binom(mu, n, n - k))


def _even_ones(mu, n, xy):
    rhs = 4**n * _prod((k + mu) / (k + 2 * mu) for k in range(1, n + 1))
    yield Case(n, None, None, _p(mu, 2 * n, Fraction(1), Fraction(1)), rhs)


def _ratio_2_8(mu, n, xy):
    one = Fraction(1)
    yield Case(n, None, None, _p(mu, 2 * n, one, -one), mu / (n + mu) * _p(mu, 2 * n, one, one))


def _doubling_2_9(mu, n, xy):
    one = Fraction(1)
    yield Case(n, None, None, _p(mu, 2 * n + 1, one, one), 2 * _p(mu, 2 * n, one, one))


def _ratio_2_10(mu, n, xy):
    one = Fraction(1)
    rhs = 2 * (n + mu) / (n + 2 * mu) * _p(mu, 2 * n - 1, one, one)
    yield Case(n, None, None, _p(mu, 2 * n, one, one), rhs)


# identity -> (checker, smallest n for which it is stated)
_REGISTRY: dict = {
    Identity.PASCAL_EVEN: (_pascal_even, 0),
    Identity.PASCAL_ODD: (_pascal_odd, 0),
    Identity.PRODUCT_EVEN: (_product_even, 0),
    Identity.PRODUCT_ODD: (_product_odd, 0),
    Identity.ODD_VANISH: (_odd_vanish, 0),
    Identity.SUM_FORM_4_6: (_sum_form, 1),
    Identity.CLOSED_2_6: (_closed_2_6, 0),
    Identity.CLOSED_4_8: (_closed_4_8, 1),
    Identity.CLOSED_4_9: (_closed_4_9, 1),
    Identity.SYMMETRY: (_symmetry, 0),
    Identity.EVEN_ONES_2_11: (_even_ones, 0),
    # n = 0 would need mu / (0 + mu), undefined at mu = 0
    Identity.RATIO_2_8: (_ratio_2_8, 1),
    Identity.DOUBLING_2_9: (_doubling_2_9, 0),
    Identity.RATIO_2_10: (_ratio_2_10, 1),
}

DEFAULT_MU_SET = tuple(
    Fraction(s)
    for s in (
        "-49/100", "-2/5", "-1/3", "-1/4", "-1/5", "-1/8", "-1/10", "-1/1000",
        "0", "1/1000", "1/7", "1/4", "1/3", "1/2", "2/3", "1", "3/2", "2", "5/2", "7",
    )
)

DEFAULT_XY_GRID = tuple(
    (Fraction(x), Fraction(y))
    for x, y in (
        ("1", "-1"), ("1", "1"), ("0", "1"), ("-3/2", "2/7"), ("1", "0"),
        ("2", "3"), ("-1", "-1"), ("1/2", "-5/3"), ("7/4", "1/9"),
    )
)


def _iter_mu(mu_set: Sequence) -> Iterator[Fraction]:
    for m in mu_set:
        yield _mu(m)


def verify_identity(
    identity,
    n_max: int,
    mu_set: Sequence = DEFAULT_MU_SET,
    xy_grid: Sequence = DEFAULT_XY_GRID,
    keep_cases: bool = False,
) -> IdentityReport:
    """Check one registered identity exactly for every ``n <= n_max`` and ``mu``.

    Indices follow each identity's own statement, e.g. ``CLOSED_4_8`` at
    ``n`` compares ``p_{4n}(1, -1)`` with its closed form. A failure is a
    report outcome; the first one is kept as the counterexample.
    """
    ident = Identity(identity)
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    mus = list(_iter_mu(mu_set))
    xy = [(Fraction(x), Fraction(y)) for x, y in xy_grid]
    checker: Callable
    checker, n_min = _REGISTRY[ident]
    report = IdentityReport(ident, (n_min, n_max), mus, passed=True)
    for mu in mus:
        for n in range(n_min, n_max + 1):
            for case in checker(mu, n, xy):
                report.cases_checked += 1
                if keep_cases:
                    report.cases.append((mu, case))
                if case.lhs != case.rhs and report.counterexample is None:
                    report.passed = False
                    report.counterexample = Counterexample(case.n, case.k, mu, case.lhs, case.rhs, case.xy)
    return report


def verify_all(
    n_max: int,
    mu_set: Sequence = DEFAULT_MU_SET,
    xy_grid: Sequence = DEFAULT_XY_GRID,
    identities: Optional[Iterable] = None,
) -> list:
    """Run :func:`verify_identity` over the registry, in registry order."""
    ids = list(Identity) if identities is None else [Identity(i) for i in identities]
    return [verify_identity(i, n_max, mu_set, xy_grid) for i in ids]
