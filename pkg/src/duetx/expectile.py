"""Duet, solo and generalized expectiles on a finite space.

The balance function

    g(y) = E^R[(x - y)_+] - E^H[(y - x)_+]

is continuous, nonincreasing and piecewise linear with kinks at the
distinct payoffs of x. The solver scans the sorted payoffs for the first
breakpoint where g <= 0 and solves the linear piece in closed form, which
returns the infimum of the zero set (the left end of a flat zero piece).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from duetx.acts import Act, as_act
from duetx.errors import DegenerateMeet, InvalidParams
from duetx.measures import (
    Measure,
    ProbMeasure,
    check_same_space,
    join,
    leq,
    meet,
    normalize,
)


@dataclass(frozen=True)
class DuetParams:
    """Disappointment weight ``alpha`` with elation measure ``p`` and
    disappointment measure ``q``."""

    alpha: float
    p: ProbMeasure
    q: ProbMeasure

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not (0.0 < a < 1.0) or math.isnan(a):
            raise InvalidParams(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)
        if not isinstance(self.p, ProbMeasure) or not isinstance(self.q, ProbMeasure):
            raise InvalidParams("p and q must be probability measures")
        try:
            check_same_space(self.p.space, self.q.space)
        except ValueError as exc:
            raise InvalidParams(str(exc)) from exc

    @classmethod
    def from_weights(cls, alpha: float, p: Sequence[float], q: Sequence[float]) -> DuetParams:
        return cls(alpha, ProbMeasure(tuple(p)), ProbMeasure(tuple(q)))

    @property
    def n(self) -> int:
        return self.p.n

    @property
    def r(self) -> tuple[float, ...]:
        """Elation weights ``alpha * p``."""
        return tuple(self.alpha * v for v in self.p.w)

    @property
    def h(self) -> tuple[float, ...]:
        """Disappointment weights ``(1 - alpha) * q``."""
        return tuple((1.0 - self.alpha) * v for v in self.q.w)

    @property
    def concordant(self) -> bool:
        return all(a <= b for a, b in zip(self.r, self.h))

    @property
    def strict(self) -> bool:
        return self.p.strict and self.q.strict

    def to_gen(self) -> GenParams:
        return GenParams(Measure(self.r, self.p.space), Measure(self.h, self.p.space))


@dataclass(frozen=True)
class GenParams:
    """Un-normalized pair: ``r`` plays ``alpha * P``, ``h`` plays ``(1 - alpha) * Q``."""

    r: Measure
    h: Measure

    def __post_init__(self) -> None:
        try:
            check_same_space(self.r.space, self.h.space)
        except ValueError as exc:
            raise InvalidParams(str(exc)) from exc
        if self.r.total <= 0.0 or self.h.total <= 0.0:
            raise InvalidParams("both measures need positive total mass")

    @classmethod
    def from_weights(cls, r: Sequence[float], h: Sequence[float]) -> GenParams:
        return cls(Measure(tuple(r)), Measure(tuple(h)))

    @property
    def n(self) -> int:
        return self.r.n

    def to_duet(self) -> DuetParams:
        rt, ht = self.r.total, self.h.total
        return DuetParams(rt / (rt + ht), normalize(self.r), normalize(self.h))

    @property
    def concordant(self) -> bool:
        return leq(self.r, self.h)

    @property
    def strict(self) -> bool:
        return self.r.strict and self.h.strict


Params = Union[DuetParams, GenParams]


def weights(params: Params) -> tuple[Sequence[float], Sequence[float]]:
    """The ``(R, H)`` weight vectors behind either parametrization."""
    if isinstance(params, DuetParams):
        return params.r, params.h
    if isinstance(params, GenParams):
        return params.r.w, params.h.w
    raise InvalidParams(f"expected DuetParams or GenParams, got {type(params).__name__}")


def expectile(r: Sequence[float], h: Sequence[float], x: Sequence[float]) -> float:
    """``inf{y : E^r[(x-y)_+] <= E^h[(y-x)_+]}`` for raw weight vectors.

    No validation; callers guarantee equal lengths, nonnegative weights and
    positive totals.
    """
    n = len(x)
    if n == 1:
        return float(x[0])
    order = sorted(range(n), key=x.__getitem__)

    r_above = math.fsum(r)
    rx_above = math.fsum(ri * xi for ri, xi in zip(r, x))
    h_below = 0.0
    hx_below = 0.0

    prev = None
    k = 0
    while k < n:
        v = x[order[k]]
        j = k
        r_at = 0.0
        rx_at = 0.0
        while j < n and x[order[j]] == v:
            i = order[j]
            r_at += r[i]
            rx_at += r[i] * x[i]
            j += 1
        # atoms with payoff > v
        r_gt = r_above - r_at
        rx_gt = rx_above - rx_at
        g = (rx_gt - v * r_gt) - (v * h_below - hx_below)
        if g <= 0.0:
            if prev is None:
                return v
            return _segment_root(r, h, x, order, k, prev, v)
        h_at = 0.0
        hx_at = 0.0
        for t in range(k, j):
            i = order[t]
            h_at += h[i]
            hx_at += h[i] * x[i]
        h_below += h_at
        hx_below += hx_at
        r_above, rx_above = r_gt, rx_gt
        prev = v
        k = j
    # g(max x) = -E^h[(max x - x)] <= 0 up to rounding; land on the top payoff.
    return float(x[order[-1]])


def _segment_root(r, h, x, order, k, lo, hi) -> float:
    # Root of the linear piece on (lo, hi]: elation atoms are x >= hi, disappointment x <= lo.
    upper = order[k:]
    lower = order[:k]
    num = math.fsum([r[i] * x[i] for i in upper] + [h[i] * x[i] for i in lower])
    den = math.fsum([r[i] for i in upper] + [h[i] for i in lower])
    if den <= 0.0:
        return lo
    y = num / den
    return min(max(y, lo), hi)


def _values(x: Act | Sequence[float], n: int) -> tuple[float, ...]:
    act = as_act(x)
    if act.n != n:
        raise InvalidParams(f"act of length {act.n} on a space of {n} atoms")
    return act.v


def solve(params: Params, x: Act | Sequence[float]) -> float:
    r, h = weights(params)
    return expectile(r, h, _values(x, len(r)))


def solve_duet(params: DuetParams, x: Act | Sequence[float]) -> float:
    """Duet expectile ``Ex_alpha^{P,Q}(x)``."""
    if not isinstance(params, DuetParams):
        raise InvalidParams("solve_duet expects DuetParams")
    return expectile(params.r, params.h, _values(x, params.n))


def solve_solo(alpha: float, p: ProbMeasure, x: Act | Sequence[float]) -> float:
    """Classical expectile: the duet expectile with ``q = p``."""
    return solve_duet(DuetParams(alpha, p, p), x)


def solve_gen(params: GenParams, x: Act | Sequence[float]) -> float:
    """Expectile of the un-normalized pair.

    Equal to ``solve_duet(params.to_duet(), x)`` by homogeneity of the
    balance equation; solving on the raw weights skips the rounding that
    normalization introduces.
    """
    if not isinstance(params, GenParams):
        raise InvalidParams("solve_gen expects GenParams")
    return expectile(params.r.w, params.h.w, _values(x, params.n))


def indicator_value(params: Params, event: set[int] | frozenset[int]) -> float:
    """Closed form ``R(A) / (R(A) + H(A^c))`` for the indicator of ``event``."""
    r, h = weights(params)
    ra = math.fsum(r[i] for i in event)
    hc = math.fsum(h[i] for i in range(len(h)) if i not in event)
    if ra + hc == 0.0:
        return 0.0
    return ra / (ra + hc)


def lipschitz_bounds(params: Params, x: Act | Sequence[float], y: Act | Sequence[float]) -> tuple[float, float]:
    """Upper bounds on ``|Ex(x) - Ex(y)|``.

    Returns the essential sup-norm of ``x - y`` under ``R v H`` and the
    ``L^1(R v H)`` distance divided by ``(R ^ H)(Omega)``. Raises
    :class:`DegenerateMeet` when ``R`` and ``H`` are mutually singular.
    """
    r, h = weights(params)
    xv = _values(x, len(r))
    yv = _values(y, len(r))
    rm, hm = Measure(tuple(r)), Measure(tuple(h))
    top = join(rm, hm)
    bottom = meet(rm, hm)
    bound_sup = max((abs(a - b) for w, a, b in zip(top.w, xv, yv) if w > 0.0), default=0.0)
    if bottom.degenerate:
        raise DegenerateMeet("R and H are mutually singular; no L1 Lipschitz bound")
    l1 = math.fsum(w * abs(a - b) for w, a, b in zip(top.w, xv, yv))
    return bound_sup, l1 / bottom.total


def ratio_identity_residual(params: Params, x: Act | Sequence[float]) -> float:
    """Gap between the expectile and its elation/disappointment ratio form."""
    r, h = weights(params)
    xv = _values(x, len(r))
    z = expectile(r, h, xv)
    elation = [i for i, a in enumerate(xv) if a >= z]
    disappointment = [i for i, a in enumerate(xv) if a < z]
    num = math.fsum([r[i] * xv[i] for i in elation] + [h[i] * xv[i] for i in disappointment])
    den = math.fsum([r[i] for i in elation] + [h[i] for i in disappointment])
    return abs(z - num / den)


def concavity_witness(params: Params) -> tuple[Act, Act] | None:
    """Two acts with equal expectile whose midpoint has a strictly lower one.

    Exists exactly when ``R <= H`` fails (for n >= 3 with positive weights;
    on two atoms when ``R1 R2 > H1 H2``). Built by reflecting the convexity
    counterexample for the swapped pair ``(H, R)``. Returns None when no
    witness is available.
    """
    r, h = weights(params)
    pair = convexity_witness_raw(h, r)
    if pair is None:
        return None
    x, y = pair
    return -x, -y


def convexity_witness_raw(r: Sequence[float], h: Sequence[float]) -> tuple[Act, Act] | None:
    """Acts ``X, Y`` with ``Ex^{r,h}(X) = Ex^{r,h}(Y) = 0 < Ex^{r,h}(X + Y)``.

    Such a pair shows ``Ex^{r,h}`` is not convex; it exists when ``r >= h``
    fails. Three-cell construction for n >= 3; for two atoms the pair
    ``(h2, -r1)``, ``(-r2, h1)`` works when ``r1 r2 < h1 h2``.
    """
    n = len(r)
    if n == 2:
        if r[0] * r[1] >= h[0] * h[1]:
            return None
        return Act((h[1], -r[0])), Act((-r[1], h[0]))
    bad = [i for i in range(n) if r[i] < h[i]]
    if not bad:
        return None
    # Partition into B1 = {i} with r(B1) < h(B1), B2 carrying r-mass, B3 carrying h-mass.
    for i in bad:
        rest = [j for j in range(n) if j != i]
        for j in rest:
            b1, b2 = [i], [j]
            b3 = [k for k in rest if k != j]
            r1, r2, r3 = (math.fsum(r[k] for k in b) for b in (b1, b2, b3))
            h1, h2, h3 = (math.fsum(h[k] for k in b) for b in (b1, b2, b3))
            if r2 > 0.0 and h3 > 0.0:
                xs = [0.0] * n
                ys = [0.0] * n
                for k in b1:
                    xs[k], ys[k] = r2 * h3, -r2 * h3
                for k in b2:
                    xs[k], ys[k] = r1 * h3, 2.0 * h1 * h3
                for k in b3:
                    xs[k], ys[k] = -2.0 * r1 * r2, -r2 * h1
                return Act(tuple(xs)), Act(tuple(ys))
    return None
