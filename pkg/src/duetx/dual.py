"""Worst-case-prior representation of duet expectiles.

For concordant strict parameters the expectile is the smallest mean over
the priors ``r`` with ``alpha * max r/q <= (1 - alpha) * min r/p``. The
minimizer is explicit, so verification reduces to feasibility,
attainment and a randomized weak-duality probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from duetx.acts import Act, as_act
from duetx.errors import InvalidParams, NotConcordant, SamplingExhausted
from duetx.expectile import DuetParams, solve_duet
from duetx.measures import ProbMeasure, check_same_space

FEAS_TOL = 1e-12
MAX_DRAWS = 100_000


@dataclass(frozen=True)
class DualWitness:
    r: ProbMeasure
    margin: float

    @property
    def feasible(self) -> bool:
        return self.margin >= -FEAS_TOL


def _margin(params: DuetParams, r: Sequence[float]) -> float:
    a = params.alpha
    lo = min(ri / pi for ri, pi in zip(r, params.p.w) if pi > 0.0)
    hi = max(ri / qi for ri, qi in zip(r, params.q.w) if qi > 0.0)
    return (1.0 - a) * lo - a * hi


def feasibility(params: DuetParams, r: ProbMeasure) -> DualWitness:
    """Feasibility margin of the prior ``r`` for the scenario set of ``params``."""
    if not isinstance(r, ProbMeasure):
        r = ProbMeasure(tuple(getattr(r, "w", r)))
    check_same_space(params.p.space, r.space)
    return DualWitness(r, _margin(params, r.w))


def _split_weights(params: DuetParams, xv: Sequence[float], z: float) -> list[float]:
    a = params.alpha
    return [a * p if x >= z else (1.0 - a) * q for x, p, q in zip(xv, params.p.w, params.q.w)]


def minimizer_r0(params: DuetParams, x: Act | Sequence[float]) -> ProbMeasure:
    """The prior attaining the infimum: ``alpha p`` on ``{x >= Ex}``, ``(1-alpha) q`` below, normalized."""
    if not params.concordant:
        raise NotConcordant("alpha * p <= (1 - alpha) * q fails; the minimizer is not certified")
    act = as_act(x)
    z = solve_duet(params, act)
    w = _split_weights(params, act.v, z)
    total = math.fsum(w)
    return ProbMeasure(tuple(v / total for v in w), params.p.space)


def _vertex(params: DuetParams, elation: np.ndarray) -> np.ndarray:
    a = params.alpha
    w = np.where(elation, a * np.asarray(params.p.w), (1.0 - a) * np.asarray(params.q.w))
    return w / w.sum()


def _proposal(params: DuetParams, rng: np.random.Generator) -> np.ndarray:
    # Plain Dirichlet proposals starve when the scenario set is thin (p = q,
    # alpha = 1/2 makes it a single point), so a share of the draws are
    # mixtures of split vertices, which are always feasible.
    n = params.n
    kind = rng.random()
    if kind < 0.25:
        return rng.dirichlet(np.ones(n))
    k = int(rng.integers(1, 4))
    verts = np.array([_vertex(params, rng.random(n) < 0.5) for _ in range(k)])
    mix = rng.dirichlet(np.ones(k)) @ verts
    if kind < 0.5:
        return mix
    lam = rng.random()
    return lam * mix + (1.0 - lam) * rng.dirichlet(np.ones(n))


def weak_duality_probe(
    params: DuetParams,
    x: Act | Sequence[float],
    trials: int,
    seed: int,
    max_draws: int = MAX_DRAWS,
) -> dict:
    """Sample ``trials`` feasible priors and report how close their means get to ``Ex(x)``.

    Raises :class:`SamplingExhausted` if ``max_draws`` proposals yield fewer
    than ``trials`` feasible ones.
    """
    if not (params.strict and params.concordant):
        raise InvalidParams("weak duality probe needs strict concordant parameters")
    act = as_act(x)
    z = solve_duet(params, act)
    r0 = minimizer_r0(params, act)
    xv = np.asarray(act.v)
    r0_gap = math.fsum(w * v for w, v in zip(r0.w, act.v)) - z

    rng = np.random.default_rng(seed)
    accepted = 0
    rejected = 0
    min_gap = math.inf
    while accepted < trials:
        if accepted + rejected >= max_draws:
            raise SamplingExhausted(f"{accepted} feasible priors after {max_draws} draws")
        cand = _proposal(params, rng)
        cand = cand / cand.sum()
        if _margin(params, cand.tolist()) < -FEAS_TOL:
            rejected += 1
            continue
        accepted += 1
        min_gap = min(min_gap, math.fsum((cand * xv).tolist()) - z)
    return {
        "ex": z,
        "r0": list(r0.w),
        "r0_gap": r0_gap,
        "min_sampled_gap": min_gap if trials else None,
        "trials": trials,
        "rejected": rejected,
    }
