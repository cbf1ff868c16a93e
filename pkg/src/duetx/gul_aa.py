"""Gul disappointment-averse certainty equivalents and Anscombe-Aumann acts.

Gul's model with coefficient ``beta`` is the solo expectile of ``u(X)``
at ``alpha = 1 / (2 + beta)``. Lottery-valued acts are evaluated through
an affine utility, ``u(lottery) = sum(probs * v(prizes))``, followed by
the duet expectile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from duetx.axioms import DEFAULT_TOL, Check, Tolerances, _cond, _finish, _run, _Sample, _witness, disco_partner
from duetx.errors import InvalidMeasure, InvalidParams
from duetx.expectile import DuetParams, expectile, solve_duet
from duetx.measures import PROB_TOL, FiniteSpace, ProbMeasure
from duetx.oracle import PreferenceOracle

Utility = Callable[[float], float]


@dataclass(frozen=True)
class Lottery:
    prizes: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        prizes = tuple(float(x) for x in self.prizes)
        probs = tuple(float(x) for x in self.probs)
        if not prizes or len(prizes) != len(probs):
            raise InvalidMeasure("a lottery needs one probability per prize")
        if not all(math.isfinite(x) for x in prizes):
            raise InvalidMeasure("prizes must be finite")
        if any(not math.isfinite(w) or w < 0.0 for w in probs):
            raise InvalidMeasure("probabilities must be finite and nonnegative")
        if abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise InvalidMeasure(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "prizes", prizes)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def degenerate(cls, x: float) -> Lottery:
        return cls((x,), (1.0,))

    def expected(self, v: Utility) -> float:
        return math.fsum(w * v(x) for x, w in zip(self.prizes, self.probs))


@dataclass(frozen=True)
class GulParams:
    beta: float
    u: Utility = float

    def __post_init__(self) -> None:
        b = float(self.beta)
        if not b > -1.0 or not math.isfinite(b):
            raise InvalidParams(f"beta must exceed -1, got {self.beta!r}")
        object.__setattr__(self, "beta", b)

    @property
    def alpha(self) -> float:
        return 1.0 / (2.0 + self.beta)

    def gamma(self, lam: float) -> float:
        """Gul's elation weight ``lam / (1 + beta (1 - lam))``."""
        return lam / (1.0 + self.beta * (1.0 - lam))


@dataclass(frozen=True)
class GulResult:
    value: float
    lam: float
    gamma: float
    residual: float


def gul_ce(params: GulParams, lot: Lottery) -> GulResult:
    """Certainty equivalent in utility units, with the elation/disappointment decomposition.

    ``lam`` is the probability of prizes whose utility is at least the
    value (ties count as elation), and ``residual`` is the gap between the
    value and ``gamma * E[u | elation] + (1 - gamma) * E[u | disappointment]``.
    """
    u = [float(params.u(x)) for x in lot.prizes]
    a = params.alpha
    value = expectile([a * w for w in lot.probs], [(1.0 - a) * w for w in lot.probs], u)
    up = [i for i, v in enumerate(u) if v >= value]
    down = [i for i, v in enumerate(u) if v < value]
    lam = math.fsum(lot.probs[i] for i in up)
    gamma = params.gamma(lam)
    mean_up = math.fsum(lot.probs[i] * u[i] for i in up) / lam if lam > 0.0 else 0.0
    mass_down = math.fsum(lot.probs[i] for i in down)
    mean_down = math.fsum(lot.probs[i] * u[i] for i in down) / mass_down if mass_down > 0.0 else 0.0
    residual = abs(value - (gamma * mean_up + (1.0 - gamma) * mean_down))
    return GulResult(value, lam, gamma, residual)


@dataclass(frozen=True)
class AAact:
    """A lottery on each atom of ``space``."""

    space: FiniteSpace
    lotteries: tuple[Lottery, ...]

    def __post_init__(self) -> None:
        lots = tuple(self.lotteries)
        if len(lots) != self.space.n:
            raise InvalidParams(f"{len(lots)} lotteries for {self.space.n} atoms")
        object.__setattr__(self, "lotteries", lots)

    def utility(self, v: Utility) -> tuple[float, ...]:
        return tuple(lot.expected(v) for lot in self.lotteries)


def mix_lotteries(lam: float, a: Lottery, b: Lottery) -> Lottery:
    """The compound lottery ``lam a + (1 - lam) b`` with prize lists concatenated."""
    return Lottery(a.prizes + b.prizes, tuple(lam * w for w in a.probs) + tuple((1.0 - lam) * w for w in b.probs))


def mix_acts(lam: float, f: AAact, g: AAact) -> AAact:
    return AAact(f.space, tuple(mix_lotteries(lam, a, b) for a, b in zip(f.lotteries, g.lotteries)))


def aa_value(alpha: float, p: ProbMeasure, q: ProbMeasure, u: Utility, f: AAact) -> float:
    """Duet expectile of the utility act ``omega -> u(f(omega))``."""
    return solve_duet(DuetParams(alpha, p, q), f.utility(u))


def _random_lottery(rng: np.random.Generator, k: int) -> Lottery:
    prizes = rng.normal(size=k) * 10.0 ** rng.uniform(-1, 1)
    probs = rng.dirichlet(np.ones(k))
    probs[-1] = 1.0 - math.fsum(probs[:-1].tolist())
    if probs[-1] < 0.0:
        probs = np.full(k, 1.0 / k)
    return Lottery(tuple(prizes.tolist()), tuple(probs.tolist()))


def _two_prize(a: float, b: float, ua: float, ub: float, target: float) -> Lottery:
    # Mix prizes a and b so that the expected utility is ``target`` (ua <= target <= ub).
    w = min(1.0, max(0.0, (ub - target) / (ub - ua)))
    return Lottery((a, b), (w, 1.0 - w))


def _fit_into(z: np.ndarray, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    # Positive affine image of ``z`` inside [lo, hi]; disappointment events are unchanged.
    spread = float(z.max() - z.min())
    if spread == 0.0:
        return np.full(len(z), rng.uniform(lo, hi))
    s = (hi - lo) / spread * rng.uniform(0.2, 1.0)
    room = (hi - lo) - s * spread
    return lo + rng.uniform(0.0, room) + s * (z - z.min())


def audit_aa_da(
    alpha: float,
    p: ProbMeasure,
    q: ProbMeasure,
    u: Utility,
    samples: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    workers: int = 1,
) -> Check:
    """Mixture form of disco aversion on lottery-valued acts.

    For disco ``f, g`` and ``h ~ g`` (the constant lottery at ``g``'s value
    and a random act on the same indifference level), checks
    ``V(lam f + (1 - lam) h) >= V(lam f + (1 - lam) g)`` for a random
    ``lam``. Acts are compared through their utility vectors; the
    comparison tolerance scales with the largest utility involved.
    """
    params = DuetParams(alpha, p, q)
    n = params.n
    space = p.space
    r, hh = params.r, params.h
    o = PreferenceOracle(space, lambda a: expectile(r, hh, a.v), name="aa")

    def V(f: AAact) -> float:
        return expectile(r, hh, f.utility(u))

    def sample(rng):
        f = AAact(space, tuple(_random_lottery(rng, int(rng.integers(1, 4))) for _ in range(n)))
        prizes = [x for lot in f.lotteries for x in lot.prizes]
        a, b = min(prizes), max(prizes)
        ua, ub = float(u(a)), float(u(b))
        if not ub > ua:
            return None
        uf = np.asarray(f.utility(u))
        vf = V(f)
        pair = disco_partner(o, uf, vf, rng)
        if pair is None:
            return None
        ug = _fit_into(pair[0], ua, ub, rng)
        g = AAact(space, tuple(_two_prize(a, b, ua, ub, float(t)) for t in ug))
        ug = np.asarray(g.utility(u))
        vg = V(g)
        if not np.array_equal(ug < vg, uf < vf):
            return None
        hs = [AAact(space, (_two_prize(a, b, ua, ub, vg),) * n)]
        z = rng.uniform(ua, ub, size=n)
        level = expectile(r, hh, tuple(z.tolist()))
        caps = []
        if z.max() > level:
            caps.append((ub - vg) / (z.max() - level))
        if z.min() < level:
            caps.append((vg - ua) / (level - z.min()))
        s = min(caps, default=0.0) * rng.uniform(0.2, 1.0)
        hs.append(AAact(space, tuple(_two_prize(a, b, ua, ub, float(vg + s * (t - level))) for t in z)))
        lam = float(rng.uniform(0.05, 0.95))
        worst = None
        for h in hs:
            if abs(V(h) - vg) > tol.equal * max(1.0, abs(vg)):
                continue
            mh, mg = mix_acts(lam, f, h), mix_acts(lam, f, g)
            acts = {"f": f.utility(u), "g": g.utility(u), "h": h.utility(u), "mix_h": mh.utility(u), "mix_g": mg.utility(u)}
            vals = {k: expectile(r, hh, v) for k, v in acts.items()}
            scale = max(1.0, max(abs(t) for v in acts.values() for t in v))
            conds = [_cond({"mix_h": 1.0, "mix_g": -1.0}, "<", tol.compare * scale)]
            res = _Sample(vals["mix_h"] - vals["mix_g"], _witness("aa_da", acts, vals, conds))
            if res.witness is not None:
                res.witness["lambda"] = lam
            if worst is None or res.margin < worst.margin:
                worst = res
        return worst

    return _finish("aa_da", _run(o, "aa_da", samples, seed, sample, workers),
                   note="acts compared through their utility vectors")
