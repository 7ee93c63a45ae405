"""Deformed measure of interval unions and the trace double integral.

The measure is ``dm_mu(x) = |x|**(2 mu) dx / (2**(mu + 1/2) Gamma(mu + 1/2))``.
For bounded sets ``A`` (with 0 outside the closure of ``A``) and ``B`` the
trace of the product of the two spectral projections reduces to::

    T = int_A dm_mu(x) int_B dm_mu(k) phi(k x),    phi(t) = |exp_mu(i t)|**2

and is compared against ``m_mu(A) m_mu(B)``: equality at ``mu = 0``,
strictly less for ``mu > 0`` and strictly greater for ``-1/2 < mu < 0``.

The double integral is computed by adaptive tensor-product Gauss-Legendre
quadrature over rectangles ``A_i x B_j``. Each panel is compared with its
bisections along both axes; the larger discrepancy is the panel's error and
picks the axis that gets split next. Pieces of ``B`` that touch ``k = 0``
are integrated in the variable ``u = k**(2 mu + 1) / (2 mu + 1)`` whenever
that softens the endpoint singularity of the weight (``0 < |mu| < 1/2``).
"""

from __future__ import annotations

import enum
import math
import re
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .bessel import gamma_fn, phi_bessel
from .core import mu_value, phi as phi_series
from .errors import ConvergenceError, DomainError, MuDeformedError

__all__ = [
    "IntervalSet",
    "QuadratureSpec",
    "TraceReport",
    "Verdict",
    "measure_mu",
    "trace_integral",
    "sweep_mu",
]

_EPS = sys.float_info.epsilon
VERDICT_MARGIN = 10.0
SPOT_CHECKS = 10
SPOT_TOL = 1e-10


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint, sorted, bounded closed intervals."""

    intervals: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        prev_hi = -math.inf
        for lo, hi in ivs:
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise DomainError("interval endpoints must be finite")
            if not lo < hi:
                raise DomainError(f"interval [{lo}, {hi}] needs lo < hi")
            if not lo > prev_hi:
                raise DomainError("intervals must be sorted and pairwise disjoint")
            prev_hi = hi
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def normalized(cls, pairs: Iterable[Sequence[float]]) -> Tuple["IntervalSet", bool]:
        """Sort and merge overlapping or touching intervals.

        Returns the set and whether the input needed any change.
        """
        raw = [(float(lo), float(hi)) for lo, hi in pairs]
        for lo, hi in raw:
            if not lo < hi:
                raise DomainError(f"interval [{lo}, {hi}] needs lo < hi")
        merged: List[List[float]] = []
        for lo, hi in sorted(raw):
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        out = cls(tuple((lo, hi) for lo, hi in merged))
        return out, list(out.intervals) != raw

    @classmethod
    def parse(cls, text: str) -> Tuple["IntervalSet", bool]:
        """Parse ``"[lo,hi];[lo,hi];..."``; see :meth:`normalized` for the flag."""
        pairs = []
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            m = re.fullmatch(r"\[\s*([^,\s]+)\s*,\s*([^\]\s]+)\s*\]", chunk)
            if m is None:
                raise DomainError(f"bad interval {chunk!r}; expected [lo,hi]")
            try:
                pairs.append((float(m.group(1)), float(m.group(2))))
            except ValueError:
                raise DomainError(f"bad interval endpoint in {chunk!r}") from None
        return cls.normalized(pairs)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __str__(self):
        return ";".join(f"[{lo!r},{hi!r}]" for lo, hi in self.intervals)

    def scaled(self, c: float) -> "IntervalSet":
        if not c > 0:
            raise DomainError("scale factor must be positive")
        return IntervalSet(tuple((c * lo, c * hi) for lo, hi in self.intervals))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(tuple(sorted(self.intervals + other.intervals)))

    def closure_contains_zero(self) -> bool:
        return any(lo <= 0.0 <= hi for lo, hi in self.intervals)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_depth: int = 30
    nodes_per_panel: int = 15
    # safety valve on total work; not part of the accuracy contract
    max_panels: int = 200_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be >= 1")
        if self.nodes_per_panel < 2:
            raise DomainError("nodes_per_panel must be >= 2")
        if self.max_panels < 1:
            raise DomainError("max_panels must be >= 1")


class Verdict(str, enum.Enum):
    GREATER = "GREATER"
    EQUAL_WITHIN_TOL = "EQUAL_WITHIN_TOL"
    LESS = "LESS"
    INDETERMINATE = "INDETERMINATE"


@dataclass
class TraceReport:
    mu: float
    set_a: IntervalSet
    set_b: IntervalSet
    trace: float
    err_estimate: float
    measure_a: float
    measure_b: float
    product: float
    verdict: Verdict
    converged: bool = True
    panels: int = 0
    warnings: List[str] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return self.trace / self.product if self.product > 0 else math.nan

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "set_a": [list(iv) for iv in self.set_a],
            "set_b": [list(iv) for iv in self.set_b],
            "trace": self.trace,
            "err_estimate": self.err_estimate,
            "measure_a": self.measure_a,
            "measure_b": self.measure_b,
            "product": self.product,
            "ratio": self.ratio,
            "verdict": self.verdict.value,
            "converged": self.converged,
            "panels": self.panels,
            "warnings": list(self.warnings),
        }


def _normalizer(m: float) -> float:
    return 1.0 / (2.0 ** (m + 0.5) * gamma_fn(m + 0.5))


def measure_mu(mu, s: IntervalSet) -> float:
    """Closed-form ``m_mu(s)``, summed over the disjoint intervals."""
    m = mu_value(mu)
    p = 2.0 * m + 1.0
    c = _normalizer(m) / p

    def antiderivative(x: float) -> float:
        return math.copysign(abs(x) ** p, x) * c

    return math.fsum(antiderivative(hi) - antiderivative(lo) for lo, hi in s)


def verdict_for(mu: float, trace: float, product: float, err: float, converged: bool = True) -> Verdict:
    """Classify ``trace`` against ``product`` with a margin of ten error estimates."""
    if not converged or not (math.isfinite(trace) and math.isfinite(err)):
        return Verdict.INDETERMINATE
    margin = VERDICT_MARGIN * err
    diff = trace - product
    if diff > margin:
        return Verdict.GREATER
    if -diff > margin:
        return Verdict.LESS
    return Verdict.EQUAL_WITHIN_TOL if mu == 0.0 else Verdict.INDETERMINATE


@lru_cache(maxsize=16)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _positive_pieces(s: IntervalSet) -> List[Tuple[float, float]]:
    # phi(k x) and both weights are even, so mirror everything onto [0, inf)
    out = []
    for lo, hi in s:
        if lo >= 0.0:
            out.append((lo, hi))
        elif hi <= 0.0:
            out.append((-hi, -lo))
        else:
            out.append((0.0, -lo))
            out.append((0.0, hi))
    return out


def _use_substitution(m: float) -> bool:
    # k**(2m) vs u**(2/(2m+1)) at the origin: the second is milder iff m < 1/2
    return m != 0.0 and m < 0.5


class _Integrand:
    """Vectorized panel rule for ``x**(2m) w(v) phi(k(v) x)`` on one mode.

    ``subst`` panels use ``u = k**(2m+1)/(2m+1)`` on the second axis, where
    the measure weight becomes 1.
    """

    def __init__(self, m: float, nodes: int):
        self.m = m
        self.p = 2.0 * m + 1.0
        self.t, self.w = _gauss(nodes)
        self.evals = 0

    def panels(self, x0, x1, v0, v1, subst: np.ndarray) -> np.ndarray:
        x0, x1, v0, v1 = (np.asarray(a, dtype=float) for a in (x0, x1, v0, v1))
        hx = 0.5 * (x1 - x0)
        hv = 0.5 * (v1 - v0)
        xs = (0.5 * (x0 + x1))[:, None] + hx[:, None] * self.t[None, :]
        vs = (0.5 * (v0 + v1))[:, None] + hv[:, None] * self.t[None, :]
        m = self.m
        if m == 0.0:
            wx = np.ones_like(xs)
            ks = vs
            wk = np.ones_like(vs)
        else:
            wx = np.exp(2.0 * m * np.log(xs))
            ks = np.where(subst[:, None], np.exp(np.log(self.p * vs) / self.p), vs)
            wk = np.where(subst[:, None], 1.0, np.exp(2.0 * m * np.log(vs)))
        arg = xs[:, :, None] * ks[:, None, :]
        f = phi_bessel(m, arg)
        self.evals += f.size
        gx = (self.w[None, :] * wx)[:, :, None]
        gk = (self.w[None, :] * wk)[:, None, :]
        return (hx * hv) * np.einsum("pij,pij->p", f, gx * gk)


@dataclass
class _Leaves:
    x0: np.ndarray
    x1: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    subst: np.ndarray
    depth: np.ndarray
    value: np.ndarray
    err: np.ndarray
    axis: np.ndarray  # 0: split x next, 1: split v next
    # the two halves along the chosen axis, reused when the leaf is split
    half_a: np.ndarray
    half_b: np.ndarray


def _refine(rule: _Integrand, x0, x1, v0, v1, subst, depth, whole) -> _Leaves:
    """Score panels whose coarse value ``whole`` is known by bisecting both axes."""
    n = len(x0)
    xm = 0.5 * (x0 + x1)
    vm = 0.5 * (v0 + v1)
    q = rule.panels(
        np.concatenate([x0, xm, x0, x0]),
        np.concatenate([xm, x1, x1, x1]),
        np.concatenate([v0, v0, v0, vm]),
        np.concatenate([v1, v1, vm, v1]),
        np.concatenate([subst] * 4),
    )
    xa, xb, va, vb = q[:n], q[n : 2 * n], q[2 * n : 3 * n], q[3 * n :]
    err_x = np.abs(whole - (xa + xb))
    err_v = np.abs(whole - (va + vb))
    axis = (err_v > err_x).astype(np.int8)
    pick_v = axis == 1
    return _Leaves(
        x0, x1, v0, v1, subst, depth,
        value=np.where(pick_v, va + vb, xa + xb),
        err=np.maximum(err_x, err_v),
        axis=axis,
        half_a=np.where(pick_v, va, xa),
        half_b=np.where(pick_v, vb, xb),
    )


def _concat(parts: List[_Leaves]) -> _Leaves:
    names = _Leaves.__dataclass_fields__.keys()
    return _Leaves(**{k: np.concatenate([getattr(p, k) for p in parts]) for k in names})


def _subset(lv: _Leaves, mask: np.ndarray) -> _Leaves:
    names = _Leaves.__dataclass_fields__.keys()
    return _Leaves(**{k: getattr(lv, k)[mask] for k in names})


def _split(rule: _Integrand, lv: _Leaves) -> _Leaves:
    on_v = lv.axis == 1
    xm = 0.5 * (lv.x0 + lv.x1)
    vm = 0.5 * (lv.v0 + lv.v1)
    # child a: lower half along the axis, child b: upper half
    ax1 = np.where(on_v, lv.x1, xm)
    av1 = np.where(on_v, vm, lv.v1)
    bx0 = np.where(on_v, lv.x0, xm)
    bv0 = np.where(on_v, vm, lv.v0)
    return _refine(
        rule,
        np.concatenate([lv.x0, bx0]),
        np.concatenate([ax1, lv.x1]),
        np.concatenate([lv.v0, bv0]),
        np.concatenate([av1, lv.v1]),
        np.concatenate([lv.subst, lv.subst]),
        np.concatenate([lv.depth + 1, lv.depth + 1]),
        np.concatenate([lv.half_a, lv.half_b]),
    )


def _ordered_sum(lv: _Leaves, values: np.ndarray) -> float:
    # fsum is exactly rounded, so the result does not depend on panel order
    order = np.lexsort((lv.v0, lv.x0, lv.subst))
    return math.fsum(values[order].tolist())


def _adaptive(m: float, a_pieces, b_pieces, spec: QuadratureSpec):
    """Return (integral without normalization, error, converged, panels)."""
    rule = _Integrand(m, spec.nodes_per_panel)
    use_u = _use_substitution(m)
    rects = []
    for xa, xb in a_pieces:
        for ka, kb in b_pieces:
            if use_u and ka == 0.0:
                rects.append((xa, xb, 0.0, kb ** (2.0 * m + 1.0) / (2.0 * m + 1.0), True))
            else:
                rects.append((xa, xb, ka, kb, False))
    if not rects:
        return 0.0, 0.0, True, 0
    x0, x1, v0, v1, subst = (np.array(c) for c in zip(*rects))
    subst = subst.astype(bool)
    whole = rule.panels(x0, x1, v0, v1, subst)
    leaves = _refine(rule, x0, x1, v0, v1, subst, np.zeros(len(x0), dtype=int), whole)

    converged = False
    while True:
        total = _ordered_sum(leaves, leaves.value)
        err = _ordered_sum(leaves, leaves.err)
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if err <= tol:
            converged = True
            break
        splittable = leaves.depth < spec.max_depth
        if not splittable.any() or len(leaves.x0) >= spec.max_panels:
            break
        # split the largest-error leaves until the rest account for <= tol/2
        order = np.argsort(-np.where(splittable, leaves.err, -1.0), kind="stable")
        cum = np.cumsum(leaves.err[order])
        n_pick = int(np.searchsorted(cum, err - 0.5 * tol, side="left")) + 1
        n_pick = min(n_pick, int(splittable.sum()), max(1, spec.max_panels - len(leaves.x0)))
        pick = np.zeros(len(leaves.x0), dtype=bool)
        pick[order[:n_pick]] = True
        leaves = _concat([_subset(leaves, ~pick), _split(rule, _subset(leaves, pick))])

    total = _ordered_sum(leaves, leaves.value)
    err = _ordered_sum(leaves, leaves.err)
    # floor for rounding in phi and in the panel sums
    err += 64.0 * _EPS * _ordered_sum(leaves, np.abs(leaves.value))
    return total, err, converged, len(leaves.x0)


def _spot_check(m: float, a_pieces, b_pieces, rng) -> Optional[str]:
    worst = 0.0
    for _ in range(SPOT_CHECKS):
        xa, xb = a_pieces[rng.integers(len(a_pieces))]
        ka, kb = b_pieces[rng.integers(len(b_pieces))]
        t = rng.uniform(xa, xb) * rng.uniform(ka, kb)
        ref = phi_series(m, t)
        worst = max(worst, abs(phi_bessel(m, t) - ref) / ref)
    if worst > SPOT_TOL:
        return f"Bessel and series forms of phi disagree by {worst:.3g} (limit {SPOT_TOL:g})"
    return None


def trace_integral(mu, a: IntervalSet, b: IntervalSet, spec: QuadratureSpec = QuadratureSpec()) -> TraceReport:
    """Trace of ``E^Q(A) E^P(B)`` as the double integral of ``phi(k x)``.

    Requires ``0`` outside the closure of ``A``. Quadrature that fails to
    reach tolerance within ``max_depth``/``max_panels`` is reported as
    INDETERMINATE with its best estimate rather than raised.
    """
    m = mu_value(mu)
    if a.closure_contains_zero():
        raise DomainError("0 must not lie in the closure of A (the trace formula needs 0 outside cl(A))")
    meas_a = measure_mu(m, a)
    meas_b = measure_mu(m, b)
    product = meas_a * meas_b
    a_pieces = _positive_pieces(a)
    b_pieces = _positive_pieces(b)
    warnings: List[str] = []

    if a_pieces and b_pieces and m != 0.0:
        msg = _spot_check(m, a_pieces, b_pieces, np.random.default_rng(20240611))
        if msg:
            warnings.append(msg)

    raw, err, converged, panels = _adaptive(m, a_pieces, b_pieces, spec)
    c = _normalizer(m)
    trace = c * c * raw
    err = c * c * err
    if not converged:
        warnings.append(f"quadrature did not reach tolerance ({panels} panels); best estimate reported")
    if warnings:
        converged = False
    return TraceReport(
        mu=m,
        set_a=a,
        set_b=b,
        trace=trace,
        err_estimate=err,
        measure_a=meas_a,
        measure_b=meas_b,
        product=product,
        verdict=verdict_for(m, trace, product, err, converged),
        converged=converged,
        panels=panels,
        warnings=warnings,
    )


def sweep_mu(mu_list: Sequence, a: IntervalSet, b: IntervalSet, spec: QuadratureSpec = QuadratureSpec()) -> List[TraceReport]:
    """One :func:`trace_integral` report per ``mu``, in input order.

    A failure at one ``mu`` yields an INDETERMINATE row carrying the message;
    the sweep carries on.
    """
    if a.closure_contains_zero():
        raise DomainError("0 must not lie in the closure of A (the trace formula needs 0 outside cl(A))")
    out = []
    for mu in mu_list:
        try:
            out.append(trace_integral(mu, a, b, spec))
        except (MuDeformedError, ConvergenceError) as exc:
            nan = math.nan
            out.append(
                TraceReport(
                    mu=float(mu), set_a=a, set_b=b, trace=nan, err_estimate=nan,
                    measure_a=nan, measure_b=nan, product=nan,
                    verdict=Verdict.INDETERMINATE, converged=False, warnings=[str(exc)],
                )
            )
    return out
