"""Recover ``(alpha, P, Q)`` from a black-box certainty equivalent.

For atoms ``i != j`` the indifference ratio ``c_ij`` solving
``U(1_i - c 1_j) = 0`` equals ``r_i / s_j`` with ``r = alpha P`` and
``s = (1 - alpha) Q``. These ratios pin down ``r`` and ``s`` once the
diagonal ratio ``c_00 = r_0 / s_0`` is known; it is not observable
directly (the act ``(1 - c) 1_0`` is zero at ``c = 1`` for every
preference) and is derived from three-atom cycles
``c_0j c_k0 / c_kj``, which is why at least three atoms are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from duetx.acts import Act
from duetx.errors import ElicitationFailed, InvalidParams, Unsupported
from duetx.expectile import DuetParams, expectile
from duetx.measures import ProbMeasure
from duetx.oracle import PreferenceOracle

BRACKET_LO = 1e-9
BRACKET_CAP = 1e12
ITERATIONS = 80
VALIDATION_TOL = 1e-6
VALIDATION_SAMPLES = 64


@dataclass(frozen=True)
class ElicitationResult:
    alpha: float
    p: ProbMeasure | None
    q: ProbMeasure | None
    residual: float
    status: str  # "recovered" | "inconsistent"
    validation: float | None = None
    ratios: list[list[float]] = field(default_factory=list, repr=False)

    @property
    def recovered(self) -> bool:
        return self.status == "recovered"

    def params(self) -> DuetParams:
        if self.p is None or self.q is None:
            raise InvalidParams("no parameters were recovered")
        return DuetParams(self.alpha, self.p, self.q)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "P": list(self.p.w) if self.p is not None else None,
            "Q": list(self.q.w) if self.q is not None else None,
            "residual": self.residual,
            "status": self.status,
            "validation": self.validation,
        }


def _unit_pair(n: int, i: int, j: int, c: float) -> Act:
    v = [0.0] * n
    v[i] = 1.0
    v[j] = -c
    return Act(tuple(v))


def indifference_ratio(o: PreferenceOracle, i: int, j: int) -> float:
    """``c > 0`` with ``U(1_i - c 1_j) = 0``, by bisection."""
    n = o.n

    def phi(c: float) -> float:
        return o(_unit_pair(n, i, j, c))

    lo, hi = BRACKET_LO, 1.0
    if phi(lo) <= 0.0:
        raise ElicitationFailed(f"U(1_{i} - c 1_{j}) <= 0 already at c={lo}", pair=(i, j))
    while phi(hi) > 0.0:
        lo = hi
        hi *= 2.0
        if hi > BRACKET_CAP:
            raise ElicitationFailed(f"no sign change for pair ({i}, {j}) below c={BRACKET_CAP}", pair=(i, j))
    for _ in range(ITERATIONS):
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ratio_matrix(o: PreferenceOracle) -> list[list[float]]:
    n = o.n
    c = [[math.nan] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                c[i][j] = indifference_ratio(o, i, j)
    return c


def fit_ratios(c: Sequence[Sequence[float]]) -> tuple[list[float], list[float], float]:
    """Fit ``r, s`` (summing to one jointly) to off-diagonal ratios.

    Returns ``(r, s, residual)``; the residual is the largest relative
    mismatch between an observed ratio and ``r_i / s_j``, including the
    spread of the cycle estimates of the diagonal ratio.
    """
    n = len(c)
    if n < 3:
        raise Unsupported("need at least three atoms")
    logs = [
        math.log(c[0][j]) + math.log(c[k][0]) - math.log(c[k][j])
        for j in range(1, n)
        for k in range(1, n)
        if j != k
    ]
    c00 = math.exp(math.fsum(logs) / len(logs))
    col = [c00] + [c[i][0] for i in range(1, n)]
    inv_row = [1.0 / c00] + [1.0 / c[0][j] for j in range(1, n)]
    t = 1.0 / (math.fsum(col) + c00 * math.fsum(inv_row))
    r = [v * t for v in col]
    s = [c00 * t * v for v in inv_row]
    residual = max(abs(math.exp(v) / c00 - 1.0) for v in logs)
    for i in range(n):
        for j in range(n):
            if i != j:
                model = r[i] / s[j]
                residual = max(residual, abs(c[i][j] - model) / model)
    return r, s, residual


def _validation_acts(n: int, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.normal(size=(samples, n)) * rng.uniform(0.1, 10.0, size=(samples, 1))


def validate(result: ElicitationResult, o: PreferenceOracle, samples: int, seed: int) -> float:
    """Largest ``|Ex(x) - U(x)|`` over random acts, using the recovered triple."""
    if result.p is None or result.q is None:
        raise InvalidParams("only a recovered result can be validated")
    return _validation_error(result.params(), o, samples, seed)


def _validation_error(params: DuetParams, o: PreferenceOracle, samples: int, seed: int) -> float:
    r, h = params.r, params.h
    worst = 0.0
    for row in _validation_acts(o.n, samples, seed):
        x = tuple(row.tolist())
        worst = max(worst, abs(expectile(r, h, x) - o(Act(x))))
    return worst


def elicit(o: PreferenceOracle, tol: float = 1e-6) -> ElicitationResult:
    """Recover the duet triple behind ``o``, or report it inconsistent.

    Raises :class:`Unsupported` for fewer than three atoms and
    :class:`ElicitationFailed` when an indifference ratio cannot be
    bracketed.
    """
    if o.n < 3:
        raise Unsupported("elicitation needs at least three atoms")
    c = ratio_matrix(o)
    r, s, residual = fit_ratios(c)
    alpha = math.fsum(r)
    sigma = math.fsum(s)
    p = ProbMeasure(tuple(v / alpha for v in r), o.space)
    q = ProbMeasure(tuple(v / sigma for v in s), o.space)
    if residual > tol:
        return ElicitationResult(alpha, p, q, residual, "inconsistent", None, c)
    err = _validation_error(DuetParams(alpha, p, q), o, VALIDATION_SAMPLES, 0)
    status = "recovered" if err <= VALIDATION_TOL else "inconsistent"
    return ElicitationResult(alpha, p, q, residual, status, err, c)


def local_weights(o: PreferenceOracle, point: Sequence[float], step: float = 1e-6) -> list[tuple[str, float]]:
    """Normalized gradient of ``U`` at ``point``, each coordinate labelled
    ``"p"`` (payoff at or above ``U``) or ``"q"`` (below).

    For a duet expectile the gradient is proportional to ``alpha p_i`` on
    elation atoms and ``(1 - alpha) q_i`` on disappointment atoms.
    """
    base = list(map(float, point))
    u = o(Act(tuple(base)))
    grads = []
    for k in range(len(base)):
        up = base.copy()
        dn = base.copy()
        up[k] += step
        dn[k] -= step
        grads.append((o(Act(tuple(up))) - o(Act(tuple(dn)))) / (2.0 * step))
    total = math.fsum(grads)
    return [("p" if base[k] >= u else "q", g / total) for k, g in enumerate(grads)]


def ratio_chains(o: PreferenceOracle, points: Sequence[Sequence[float]], step: float = 1e-6) -> dict:
    """Test whether local gradients at ``points`` fit a single ``(r, s)``.

    Each point fixes the ratios of one labelled weight per atom. The
    weights are linked in log space with a union-find; a cycle that closes
    with a nonzero log gap shows no duet expectile matches ``U`` at all
    these points. Returns the chains and the largest relative clash.
    """
    chains = [local_weights(o, pt, step) for pt in points]
    parent: dict[tuple[str, int], tuple[str, int]] = {}
    offset: dict[tuple[str, int], float] = {}

    def find(v):
        if v not in parent:
            parent[v] = v
            offset[v] = 0.0
        root, acc = v, 0.0
        path = []
        while parent[root] != root:
            path.append(root)
            acc += offset[root]
            root = parent[root]
        # path compression
        running = acc
        for node in path:
            prev = offset[node]
            parent[node] = root
            offset[node] = running
            running -= prev
        return root, acc

    clash = 0.0
    for chain in chains:
        nodes = [(label, k) for k, (label, _) in enumerate(chain)]
        logs = [math.log(w) if w > 0.0 else -math.inf for _, w in chain]
        base, base_log = nodes[0], logs[0]
        for node, lg in zip(nodes[1:], logs[1:]):
            # log w(node) - log w(base) = lg - base_log
            want = lg - base_log
            ra, oa = find(node)
            rb, ob = find(base)
            if ra == rb:
                clash = max(clash, abs(math.expm1((oa - ob) - want)))
            else:
                parent[ra] = rb
                offset[ra] = want + ob - oa
    return {
        "chains": [
            {"point": list(map(float, pt)), "weights": [[f"{lab}{k + 1}", w] for k, (lab, w) in enumerate(ch)]}
            for pt, ch in zip(points, chains)
        ],
        "clash": clash,
    }
