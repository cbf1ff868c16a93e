"""Audit a black-box certainty equivalent against the duet-expectile axioms.

Every check draws acts from a seeded generator, evaluates the oracle and
records the smallest slack observed. A failing check carries a witness:
the acts involved, their oracle values, and the inequalities they
violate, written so that :func:`replay` can re-evaluate them.

Samples are generated from ``(seed, check name, sample index)``, so the
report does not depend on how many worker threads evaluate them.
"""

from __future__ import annotations

import itertools
import json
import math
import operator
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from duetx.acts import ssd_dominates, Act
from duetx.elicit import fit_ratios, indifference_ratio, ratio_matrix
from duetx.errors import DuetError, ExhaustionRefused, InvalidParams
from duetx.expectile import DuetParams, GenParams, concavity_witness, weights
from duetx.measures import Measure, ProbMeasure, normalize
from duetx.oracle import PreferenceOracle

SCHEMA = "duetx.audit/1"
EI_MAX_N = 12
BISECT_STEPS = 60
DISCO_RETRIES = 20
# The partner's shift lands at least 5% of the scale past the threshold, so
# the threshold itself is only needed coarsely.
DISCO_BISECT_STEPS = 30


@dataclass(frozen=True)
class Tolerances:
    compare: float = 1e-9
    equal: float = 1e-10
    exact: float = 1e-12


DEFAULT_TOL = Tolerances()


@dataclass
class Check:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    samples: int = 0
    skipped: int = 0
    min_margin: float | None = None
    witness: dict | None = None
    note: str = ""
    subchecks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "status": self.status,
            "samples": self.samples,
            "skipped": self.skipped,
            "min_margin": self.min_margin,
            "witness": self.witness,
            "note": self.note,
        }
        if self.subchecks:
            d["subchecks"] = [c.to_dict() for c in self.subchecks]
        return d


@dataclass
class AuditReport:
    oracle: str
    n: int
    seed: int | None
    samples: int
    checks: list[Check]

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.failed]

    @property
    def ok(self) -> bool:
        return not self.failures

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "oracle": self.oracle,
            "n": self.n,
            "seed": self.seed,
            "samples": self.samples,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)


# ---------------------------------------------------------------- witnesses

_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def _cond(terms: dict[str, float], op: str, const: float = 0.0, absolute: bool = False) -> dict:
    """The inequality ``(|sum| or sum of coef * U(act)) + const  op  0``."""
    return {"terms": terms, "abs": absolute, "const": const, "op": op}


def _holds(cond: dict, values: dict[str, float]) -> bool:
    s = math.fsum(coef * values[name] for name, coef in cond["terms"].items())
    if cond["abs"]:
        s = abs(s)
    return _OPS[cond["op"]](s + cond["const"], 0.0)


def _evaluate(o: PreferenceOracle, acts: dict[str, Sequence[float]]) -> dict[str, float]:
    return {k: o(tuple(v)) for k, v in acts.items()}


def _witness(kind: str, acts: dict, values: dict, conds: list[dict]) -> dict | None:
    if all(_holds(c, values) for c in conds):
        return {
            "kind": kind,
            "acts": {k: [float(a) for a in v] for k, v in acts.items()},
            "values": dict(values),
            "conditions": conds,
        }
    return None


def replay(witness: dict, o: PreferenceOracle) -> bool:
    """Re-evaluate the witness acts through ``o``; True if every recorded
    inequality still holds, i.e. the violation is reproduced."""
    values = _evaluate(o, witness["acts"])
    return all(_holds(c, values) for c in witness["conditions"])


# ---------------------------------------------------------------- sampling


@dataclass
class _Sample:
    margin: float
    witness: dict | None = None


def _tag(name: str) -> int:
    return zlib.crc32(name.encode())


def _run(
    o: PreferenceOracle,
    name: str,
    samples: int,
    seed: int,
    fn: Callable[[np.random.Generator], _Sample | None],
    workers: int = 1,
) -> list[_Sample | None]:
    tag = _tag(name)
    seed = int(seed)

    def one(i: int):
        return fn(np.random.default_rng([seed, tag, i]))

    if workers > 1 and not o.serial and samples > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, range(samples)))
    return [one(i) for i in range(samples)]


def _finish(name: str, results: Iterable[_Sample | None], note: str = "") -> Check:
    done = 0
    skipped = 0
    margin = math.inf
    witness = None
    for res in results:
        if res is None:
            skipped += 1
            continue
        done += 1
        margin = min(margin, res.margin)
        if witness is None and res.witness is not None:
            witness = res.witness
    status = "fail" if witness is not None else ("pass" if done else "skipped")
    return Check(
        name,
        status,
        samples=done,
        skipped=skipped,
        min_margin=margin if done else None,
        witness=witness,
        note=note,
    )


def draw_act(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random payoffs mixing Gaussian, small-integer (tie-heavy) and wide-range draws."""
    style = int(rng.integers(3))
    if style == 0:
        return rng.normal(size=n) * 10.0 ** rng.uniform(-1, 1)
    if style == 1:
        return rng.integers(-3, 4, size=n).astype(float)
    return rng.uniform(-1.0, 1.0, size=n) * 10.0 ** rng.uniform(-2, 2)


def _t(v) -> tuple[float, ...]:
    return tuple(float(a) for a in v)


def _indicator(n: int, members: Iterable[int]) -> tuple[float, ...]:
    s = set(members)
    return tuple(1.0 if i in s else 0.0 for i in range(n))


def _hint_weights(o: PreferenceOracle):
    if isinstance(o.params, (DuetParams, GenParams)):
        return weights(o.params)
    return None


def reference_measures(o: PreferenceOracle) -> tuple[ProbMeasure | None, ProbMeasure | None]:
    """The normalized ``P`` and ``Q`` of a duet oracle, if it declares them."""
    if isinstance(o.params, DuetParams):
        return o.params.p, o.params.q
    if isinstance(o.params, GenParams):
        return normalize(o.params.r), normalize(o.params.h)
    return None, None


# ---------------------------------------------------------------- monotonicity and continuity


def audit_sm(o: PreferenceOracle, samples: int, seed: int, tol: Tolerances = DEFAULT_TOL, workers: int = 1) -> Check:
    """Strict monotonicity: raising one payoff must raise ``U`` (margin 0)."""
    n = o.n

    def probe(x, y) -> _Sample:
        acts = {"x": x, "y": y}
        vals = _evaluate(o, acts)
        w = _witness("sm", acts, vals, [_cond({"x": 1.0, "y": -1.0}, "<=")])
        return _Sample(vals["x"] - vals["y"], w)

    structured = [probe(_indicator(n, [i]), (0.0,) * n) for i in range(n)]

    def sample(rng):
        y = draw_act(rng, n)
        x = y.copy()
        x[int(rng.integers(n))] += 10.0 ** rng.uniform(-6, 0)
        return probe(_t(x), _t(y))

    return _finish("sm", structured + _run(o, "sm", samples, seed, sample, workers),
                   note="strict monotonicity, margin U(x) - U(y) must be > 0")


def audit_monotone(o: PreferenceOracle, samples: int, seed: int, tol: Tolerances = DEFAULT_TOL, workers: int = 1) -> Check:
    """Weak monotonicity: ``x >= y`` atomwise implies ``U(x) >= U(y)``."""
    n = o.n

    def probe(x, y) -> _Sample:
        acts = {"x": x, "y": y}
        vals = _evaluate(o, acts)
        w = _witness("monotone", acts, vals, [_cond({"x": 1.0, "y": -1.0}, "<", tol.compare)])
        return _Sample(vals["x"] - vals["y"], w)

    structured = [probe(_indicator(n, [i]), (0.0,) * n) for i in range(n)]

    def sample(rng):
        y = draw_act(rng, n)
        bump = rng.uniform(0.0, 1.0, size=n) * (rng.random(n) < 0.5) * 10.0 ** rng.uniform(-6, 1)
        return probe(_t(y + bump), _t(y))

    return _finish("monotone", structured + _run(o, "monotone", samples, seed, sample, workers))


def audit_continuity(o: PreferenceOracle, samples: int, seed: int, tol: Tolerances = DEFAULT_TOL, workers: int = 1) -> Check:
    """``|U(x) - U(y)| <= max|x - y|`` (Lipschitz surrogate for continuity)."""
    n = o.n

    def sample(rng):
        x = draw_act(rng, n)
        y = x + rng.normal(size=n) * 10.0 ** rng.uniform(-8, 1)
        bound = float(np.max(np.abs(x - y)))
        acts = {"x": _t(x), "y": _t(y)}
        vals = _evaluate(o, acts)
        gap = abs(vals["x"] - vals["y"])
        w = _witness("lipschitz", acts, vals,
                     [_cond({"x": 1.0, "y": -1.0}, ">", -bound - tol.compare, absolute=True)])
        return _Sample(bound - gap, w)

    return _finish("continuity", _run(o, "continuity", samples, seed, sample, workers),
                   note="continuity (Lipschitz surrogate): |U(x)-U(y)| <= sup|x-y|")


def audit_wmc(o: PreferenceOracle) -> Check:
    return Check("wmc", "pass", note="informational: monotone continuity holds trivially on a finite space")


# ---------------------------------------------------------------- disco pairs


def _shift_to(o: PreferenceOracle, z: np.ndarray, target: float, tol: float) -> np.ndarray | None:
    """Translate ``z`` so that ``U`` equals ``target``; bisection if translation alone misses."""
    m = target - o(_t(z))
    cand = z + m
    u = o(_t(cand))
    if abs(u - target) <= tol:
        return cand
    lo, hi = m, m
    span = max(1.0, abs(m))
    while o(_t(z + lo)) > target:
        lo -= span
        span *= 2.0
        if span > 1e12:
            return None
    span = max(1.0, abs(m))
    while o(_t(z + hi)) < target:
        hi += span
        span *= 2.0
        if span > 1e12:
            return None
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if o(_t(z + mid)) < target:
            lo = mid
        else:
            hi = mid
    cand = z + hi
    return cand if abs(o(_t(cand)) - target) <= tol else None


def disco_partner(
    o: PreferenceOracle, x: np.ndarray, cx: float, rng: np.random.Generator
) -> tuple[np.ndarray, float] | None:
    """An act ``y`` with the same disappointment event as ``x``.

    ``y`` is drawn negative on the disappointment atoms of ``x`` and
    ``s + b`` (``b >= 0``) on the rest; the shift ``s`` is located by
    doubling and bisection so that the events match, then verified.
    """
    n = len(x)
    dis = x < cx
    if not dis.any():
        c = float(rng.normal())
        return np.full(n, c), o((c,) * n)
    scale = max(1.0, float(np.max(np.abs(x)))) * 10.0 ** rng.uniform(-1, 1)
    for attempt in range(DISCO_RETRIES):
        a = rng.uniform(0.05, 2.0, size=n) * scale
        # Later attempts keep y flat on the elation atoms, which always works
        # when U ignores the disappointment atoms of x.
        keep = 0.7 if attempt < DISCO_RETRIES // 2 else 0.0
        b = rng.uniform(0.0, 2.0, size=n) * scale * (rng.random(n) < keep)

        def build(s: float) -> np.ndarray:
            return np.where(dis, -a, s + b)

        def matches(s: float) -> tuple[bool, float]:
            y = build(s)
            cy = o(_t(y))
            return bool(np.array_equal(y < cy, dis)), cy

        hi = scale
        ok, cy = matches(hi)
        steps = 0
        while not ok and steps < 30:
            hi *= 2.0
            steps += 1
            ok, cy = matches(hi)
        if not ok:
            continue
        lo = -float(np.max(a)) - scale
        if matches(lo)[0]:
            s = lo
        else:
            for _ in range(DISCO_BISECT_STEPS):
                mid = 0.5 * (lo + hi)
                if matches(mid)[0]:
                    hi = mid
                else:
                    lo = mid
            s = hi + rng.uniform(0.05, 1.0) * (hi - lo + scale)
        ok, cy = matches(s)
        if ok:
            return build(s), cy
    return None


def _disco_conditions(x, y, dis) -> list[dict]:
    # Premise of a disco witness: both acts fall below their values exactly on the same atoms.
    out = []
    for name, v in (("x", x), ("y", y)):
        for i, d in enumerate(dis):
            out.append(_cond({name: 1.0}, ">" if d else "<=", -float(v[i])))
    return out


def audit_disco_additivity(o: PreferenceOracle, samples: int, seed: int, tol: Tolerances = DEFAULT_TOL, workers: int = 1) -> Check:
    """``U(x + y) = U(x) + U(y)`` for disco pairs."""
    n = o.n

    def sample(rng):
        x = draw_act(rng, n)
        cx = o(_t(x))
        pair = disco_partner(o, x, cx, rng)
        if pair is None:
            return None
        y, _ = pair
        acts = {"x": _t(x), "y": _t(y), "x+y": _t(x + y)}
        vals = _evaluate(o, acts)
        dev = abs(vals["x+y"] - vals["x"] - vals["y"])
        conds = _disco_conditions(x, y, x < vals["x"]) + [
            _cond({"x+y": 1.0, "x": -1.0, "y": -1.0}, ">", -tol.compare, absolute=True)
        ]
        return _Sample(-dev, _witness("disco_additivity", acts, vals, conds))

    return _finish("disco_additivity", _run(o, "disco_additivity", samples, seed, sample, workers),
                   note="margin is -|U(x+y) - U(x) - U(y)|")


def audit_da(o: PreferenceOracle, samples: int, seed: int, tol: Tolerances = DEFAULT_TOL, workers: int = 1) -> Check:
    """Disco aversion: for disco ``x, y`` and ``y' ~ y``, ``U(x + y') >= U(x + y)``.

    Each draw tests ``y'`` equal to the constant ``U(y)`` and a random act
    translated onto the indifference level of ``y``.
    """
    n = o.n

    def sample(rng):
        x = draw_act(rng, n)
        cx = o(_t(x))
        pair = disco_partner(o, x, cx, rng)
        if pair is None:
            return None
        y, cy = pair
        alternatives = [np.full(n, cy)]
        z = _shift_to(o, draw_act(rng, n), cy, tol.equal)
        if z is not None:
            alternatives.append(z)
        worst = None
        for yp in alternatives:
            acts = {"x": _t(x), "y": _t(y), "y'": _t(yp), "x+y": _t(x + y), "x+y'": _t(x + yp)}
            vals = _evaluate(o, acts)
            conds = _disco_conditions(x, y, x < vals["x"]) + [
                _cond({"y'": 1.0, "y": -1.0}, "<=", -tol.equal, absolute=True),
                _cond({"x+y'": 1.0, "x+y": -1.0}, "<", tol.compare),
            ]
            res = _Sample(vals["x+y'"] - vals["x+y"], _witness("da", acts, vals, conds))
            if worst is None or (res.witness is not None and worst.witness is None) or (
                (res.witness is None) == (worst.witness is None) and res.margin < worst.margin
            ):
                worst = res
        return worst

    return _finish("da", _run(o, "da", samples, seed, sample, workers),
                   note="y' ranges over the constant U(y) and random acts with U(y') = U(y)")


# ---------------------------------------------------------------- convexity


def _normalize_pair(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = max(float(np.max(np.abs(x))), float(np.max(np.abs(y))), 1e-300)
    return x / s, y / s


def _pair_witnesses(c: Sequence[Sequence[float]]) -> list[tuple[np.ndarray, np.ndarray]]:
    # With X_ij = 1_i - c_ij 1_j: U(2 c_ji X_ij) = U(2 X_ji) = 0, and their
    # midpoint is (1 - c_ij c_ji) 1_j, strictly negative when c_ij c_ji > 1.
    n = len(c)
    best = None
    for i, j in itertools.combinations(range(n), 2):
        prod = c[i][j] * c[j][i]
        if prod > 1.0 and (best is None or prod > best[0]):
            best = (prod, i, j)
    if best is None:
        return []
    _, i, j = best
    x = np.zeros(n)
    y = np.zeros(n)
    x[i], x[j] = 2.0 * c[j][i], -2.0 * c[j][i] * c[i][j]
    y[j], y[i] = 2.0, -2.0 * c[j][i]
    return [_normalize_pair(x, y)]


def convexity_candidates(o: PreferenceOracle) -> list[tuple[np.ndarray, np.ndarray]]:
    """Aimed candidate pairs for a convexity violation.

    Uses the declared duet weights when present; otherwise the weights
    fitted from indifference ratios. Candidates are only proposals; the
    audit decides with the oracle.
    """
    n = o.n
    hint = _hint_weights(o)
    out: list[tuple[np.ndarray, np.ndarray]] = []
    r = h = None
    if hint is not None:
        r, h = hint
    elif n >= 2:
        try:
            if n == 2:
                c = [[math.nan, indifference_ratio(o, 0, 1)], [indifference_ratio(o, 1, 0), math.nan]]
                return _pair_witnesses(c)
            c = ratio_matrix(o)
            out.extend(_pair_witnesses(c))
            r, h, _ = fit_ratios(c)
        except DuetError:
            return out
    if r is not None:
        wit = concavity_witness(GenParams(Measure(tuple(r)), Measure(tuple(h))))
        if wit is not None:
            out.append(_normalize_pair(np.asarray(wit[0].v), np.asarray(wit[1].v)))
    return out


def audit_convexity(
    o: PreferenceOracle,
    samples: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    workers: int = 1,
    candidates: Sequence[tuple[Sequence[float], Sequence[float]]] = (),
    aimed: bool = True,
) -> Check:
    """Preference convexity: ``U(x) = U(y)`` implies ``U(mix) >= U(x)``.

    Mixtures are tested at weights 1/4, 1/2 and 3/4.
    """
    n = o.n

    def probe(x: np.ndarray, y: np.ndarray) -> _Sample | None:
        ux = o(_t(x))
        y = _shift_to(o, np.asarray(y, dtype=float), ux, tol.equal)
        if y is None:
            return None
        worst = None
        for lam in (0.25, 0.5, 0.75):
            mid = lam * x + (1.0 - lam) * y
            acts = {"x": _t(x), "y": _t(y), "mix": _t(mid)}
            vals = _evaluate(o, acts)
            conds = [
                _cond({"x": 1.0, "y": -1.0}, "<=", -tol.equal, absolute=True),
                _cond({"mix": 1.0, "x": -1.0}, "<", tol.compare),
            ]
            res = _Sample(vals["mix"] - vals["x"], _witness("convexity", acts, vals, conds))
            if worst is None or (res.witness is not None and worst.witness is None) or (
                (res.witness is None) == (worst.witness is None) and res.margin < worst.margin
            ):
                worst = res
        return worst

    pairs = [(np.asarray(a, dtype=float), np.asarray(b, dtype=float)) for a, b in candidates]
    if aimed:
        pairs.extend(convexity_candidates(o))
    structured = [probe(x, y) for x, y in pairs]

    def sample(rng):
        return probe(draw_act(rng, n), draw_act(rng, n))

    return _finish("convexity", structured + _run(o, "convexity", samples, seed, sample, workers),
                   note="preference convexity (quasi-concavity of U)")


def audit_concavity(
    o: PreferenceOracle,
    samples: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    workers: int = 1,
    aimed: bool = True,
) -> Check:
    """Midpoint concavity: ``U((x + y) / 2) >= (U(x) + U(y)) / 2``.

    Aimed pairs are the convexity candidates; an indifferent pair whose
    midpoint drops below the common value breaks both properties.
    """
    n = o.n

    def probe(x: np.ndarray, y: np.ndarray) -> _Sample:
        acts = {"x": _t(x), "y": _t(y), "mid": _t(0.5 * (x + y))}
        vals = _evaluate(o, acts)
        scale = max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(y))))
        conds = [_cond({"mid": 1.0, "x": -0.5, "y": -0.5}, "<", tol.compare * scale)]
        return _Sample(vals["mid"] - 0.5 * (vals["x"] + vals["y"]), _witness("concavity", acts, vals, conds))

    structured = []
    if aimed:
        for x, y in convexity_candidates(o):
            y = _shift_to(o, np.asarray(y, dtype=float), o(_t(x)), tol.equal)
            if y is not None:
                structured.append(probe(np.asarray(x, dtype=float), y))

    def sample(rng):
        return probe(draw_act(rng, n), draw_act(rng, n))

    return _finish("concavity", structured + _run(o, "concavity", samples, seed, sample, workers),
                   note="midpoint concavity of U")


# ---------------------------------------------------------------- risk attitudes


def _subset_acts(n: int) -> list[tuple[float, ...]]:
    if n <= 10:
        subsets = [s for k in range(1, n) for s in itertools.combinations(range(n), k)]
    else:
        subsets = [(i,) for i in range(n)] + [tuple(j for j in range(n) if j != i) for i in range(n)]
    acts = [_indicator(n, s) for s in subsets]
    return acts + [tuple(-a for a in v) for v in acts]


def audit_weak_risk_aversion(
    o: PreferenceOracle,
    p: ProbMeasure,
    samples: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    workers: int = 1,
    name: str = "weak_risk_aversion",
) -> Check:
    """``U(x) <= E^p[x]`` for every act."""
    n = o.n
    if p.n != n:
        raise InvalidParams("reference measure lives on a different space")

    def probe(x) -> _Sample:
        mean = p.expect(x)
        acts = {"x": x}
        vals = _evaluate(o, acts)
        w = _witness("weak_risk_aversion", acts, vals, [_cond({"x": 1.0}, ">", -mean - tol.compare)])
        if w is not None:
            w["mean"] = mean
        return _Sample(mean - vals["x"], w)

    structured = [probe(v) for v in _subset_acts(n)]

    def sample(rng):
        return probe(_t(draw_act(rng, n)))

    return _finish(name, structured + _run(o, name, samples, seed, sample, workers),
                   note=f"U(x) <= E[x] under {list(p.w)}")


def sra_partner(params: DuetParams) -> ProbMeasure:
    """The measure ``(Q - alpha (P + Q)) / (1 - 2 alpha)`` paired with ``P``
    for joint strong risk aversion (needs concordance, ``P != Q``)."""
    a = params.alpha
    if not params.concordant or a >= 0.5:
        raise InvalidParams("needs concordant parameters with alpha < 1/2")
    w = [(q - a * (p + q)) / (1.0 - 2.0 * a) for p, q in zip(params.p.w, params.q.w)]
    w = [max(v, 0.0) for v in w]
    return normalize(Measure(tuple(w), params.p.space))


def _comparable_pair(rng: np.random.Generator, n: int, p: ProbMeasure, r: ProbMeasure):
    kind = int(rng.integers(3))
    x = draw_act(rng, n)
    if kind == 0:
        return x, x - rng.uniform(0, 1, size=n) * (rng.random(n) < 0.5)
    if kind == 1:
        y = x.copy()
        for _ in range(int(rng.integers(1, 3))):
            i, j = rng.choice(n, size=2, replace=False)
            y[i], y[j] = y[j], y[i]
        return x, y
    # mean-preserving noise on a block where x is constant, zero-mean under p and r
    if n < 3:
        return x, x
    k = int(rng.integers(3, n + 1))
    block = rng.choice(n, size=k, replace=False)
    x[block] = x[block[0]]
    a = np.array([[p.w[i] for i in block], [r.w[i] for i in block]])
    _, _, vt = np.linalg.svd(a)
    null = vt[2:] if k > 2 else vt[:0]
    if not len(null):
        return x, x
    e = rng.normal(size=len(null)) @ null
    y = x.copy()
    y[block] += e * 10.0 ** rng.uniform(-2, 1)
    return x, y


def audit_joint_sra(
    o: PreferenceOracle,
    p: ProbMeasure,
    r: ProbMeasure,
    samples: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    workers: int = 1,
    candidates: Sequence[tuple[Sequence[float], Sequence[float]]] = (),
) -> Check:
    """If ``x`` dominates ``y`` in second order under both ``p`` and ``r``,
    then ``U(x) >= U(y)``. Draws where the dominance fails are skipped."""
    n = o.n

    def probe(x, y) -> _Sample | None:
        xa, ya = Act(_t(x)), Act(_t(y))
        slack = tol.exact * max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(y))))
        if not (ssd_dominates(xa, ya, p, slack) and ssd_dominates(xa, ya, r, slack)):
            return None
        acts = {"x": xa.v, "y": ya.v}
        vals = _evaluate(o, acts)
        w = _witness("joint_sra", acts, vals, [_cond({"x": 1.0, "y": -1.0}, "<", tol.compare)])
        return _Sample(vals["x"] - vals["y"], w)

    structured = [probe(np.asarray(a, float), np.asarray(b, float)) for a, b in candidates]

    def sample(rng):
        x, y = _comparable_pair(rng, n, p, r)
        return probe(x, y)

    return _finish("joint_sra", structured + _run(o, "joint_sra", samples, seed, sample, workers),
                   note="draws without joint second-order dominance are counted as skipped")


# ---------------------------------------------------------------- event structure


def audit_event_independence(o: PreferenceOracle, tol: Tolerances = DEFAULT_TOL) -> Check:
    """Exhaustive check over disjoint ``(A, B, C)``: ``U(1_A) >= U(1_B)``
    must imply ``U(1_{A+C}) >= U(1_{B+C})``."""
    n = o.n
    if n > EI_MAX_N:
        raise ExhaustionRefused(f"{4 ** n} event triples for n={n}; limit is n={EI_MAX_N}")
    u = np.array([o(_indicator(n, [i for i in range(n) if m >> i & 1])) for m in range(1 << n)])
    total = 4 ** n
    chunk = 1 << 18
    min_margin = math.inf
    witness = None
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        A = np.zeros_like(codes)
        B = np.zeros_like(codes)
        C = np.zeros_like(codes)
        for i in range(n):
            d = (codes >> (2 * i)) & 3
            A |= (d == 1).astype(np.int64) << i
            B |= (d == 2).astype(np.int64) << i
            C |= (d == 3).astype(np.int64) << i
        premise = u[A] >= u[B]
        gap = u[A | C] - u[B | C]
        if premise.any():
            min_margin = min(min_margin, float(gap[premise].min()))
        bad = np.flatnonzero(premise & (gap < -tol.exact))
        if bad.size and witness is None:
            k = bad[0]
            a, b, c = (int(M[k]) for M in (A, B, C))
            members = {
                "A": [i for i in range(n) if a >> i & 1],
                "B": [i for i in range(n) if b >> i & 1],
                "C": [i for i in range(n) if c >> i & 1],
            }
            acts = {
                "A": _indicator(n, members["A"]),
                "B": _indicator(n, members["B"]),
                "A+C": _indicator(n, members["A"] + members["C"]),
                "B+C": _indicator(n, members["B"] + members["C"]),
            }
            vals = _evaluate(o, acts)
            conds = [
                _cond({"A": 1.0, "B": -1.0}, ">="),
                _cond({"A+C": 1.0, "B+C": -1.0}, "<", tol.exact),
            ]
            witness = _witness("event_independence", acts, vals, conds)
            if witness is not None:
                witness["events"] = members
            break
    return Check(
        "ei",
        "fail" if witness is not None else "pass",
        samples=total,
        min_margin=None if min_margin == math.inf else min_margin,
        witness=witness,
        note="exhaustive over disjoint event triples",
    )


def _groups(p: ProbMeasure, q: ProbMeasure | None) -> list[list[int]]:
    keys: dict[tuple, list[int]] = {}
    for i in range(p.n):
        key = (p.w[i],) if q is None else (p.w[i], q.w[i])
        keys.setdefault(key, []).append(i)
    return [g for g in keys.values() if len(g) > 1]


def audit_probabilistic_sophistication(
    o: PreferenceOracle,
    p: ProbMeasure,
    samples: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    workers: int = 1,
    q: ProbMeasure | None = None,
) -> Check:
    """``U`` is unchanged by permutations preserving the law of acts under
    ``p`` (and under ``q`` too, when given)."""
    n = o.n
    name = "ps" if q is None else "ps2"
    groups = _groups(p, q)
    if not groups:
        return Check(name, "skipped", note="no nontrivial distribution-preserving permutation")

    def sample(rng):
        x = draw_act(rng, n)
        perm = np.arange(n)
        for g in groups:
            perm[g] = rng.permutation(g)
        if np.array_equal(perm, np.arange(n)):
            g = groups[int(rng.integers(len(groups)))]
            perm[g[0]], perm[g[1]] = g[1], g[0]
        acts = {"x": _t(x), "x.perm": _t(x[perm])}
        vals = _evaluate(o, acts)
        dev = abs(vals["x.perm"] - vals["x"])
        w = _witness(name, acts, vals, [_cond({"x.perm": 1.0, "x": -1.0}, ">", -tol.equal, absolute=True)])
        return _Sample(-dev, w)

    return _finish(name, _run(o, name, samples, seed, sample, workers),
                   note="permutations within atoms of equal weight" + ("" if q is None else " under both measures"))


# ---------------------------------------------------------------- functional properties


def audit_lemma71_bundle(o: PreferenceOracle, samples: int, seed: int, tol: Tolerances = DEFAULT_TOL, workers: int = 1) -> Check:
    """Internality, translation invariance, sup-norm 1-Lipschitz,
    superadditivity and positive homogeneity, as one consolidated check."""
    n = o.n

    def internality(rng):
        x = draw_act(rng, n)
        acts = {"x": _t(x)}
        vals = _evaluate(o, acts)
        lo, hi = float(x.min()), float(x.max())
        w = _witness("internality", acts, vals, [_cond({"x": 1.0}, "<", -lo + tol.equal)]) or _witness(
            "internality", acts, vals, [_cond({"x": 1.0}, ">", -hi - tol.equal)]
        )
        return _Sample(min(vals["x"] - lo, hi - vals["x"]), w)

    def translation(rng):
        x = draw_act(rng, n)
        m = float(rng.normal() * 10.0 ** rng.uniform(-2, 2))
        acts = {"x": _t(x), "x+m": _t(x + m)}
        vals = _evaluate(o, acts)
        dev = abs(vals["x+m"] - vals["x"] - m)
        return _Sample(-dev, _translation_witness(acts, vals, m, tol.equal))

    def lipschitz(rng):
        x = draw_act(rng, n)
        y = draw_act(rng, n) if rng.random() < 0.5 else x + rng.normal(size=n) * 10.0 ** rng.uniform(-6, 0)
        bound = float(np.max(np.abs(x - y)))
        acts = {"x": _t(x), "y": _t(y)}
        vals = _evaluate(o, acts)
        w = _witness("lipschitz", acts, vals,
                     [_cond({"x": 1.0, "y": -1.0}, ">", -bound - tol.compare, absolute=True)])
        return _Sample(bound - abs(vals["x"] - vals["y"]), w)

    def superadditivity(rng):
        x = draw_act(rng, n)
        y = draw_act(rng, n)
        acts = {"x": _t(x), "y": _t(y), "x+y": _t(x + y)}
        vals = _evaluate(o, acts)
        w = _witness("superadditivity", acts, vals, [_cond({"x+y": 1.0, "x": -1.0, "y": -1.0}, "<", tol.compare)])
        return _Sample(vals["x+y"] - vals["x"] - vals["y"], w)

    def homogeneity(rng):
        x = draw_act(rng, n)
        lam = float(10.0 ** rng.uniform(-2, 2))
        acts = {"x": _t(x), "lx": _t(lam * x)}
        vals = _evaluate(o, acts)
        slack = tol.equal * max(1.0, abs(lam * vals["x"]))
        w = _witness("homogeneity", acts, vals, [_cond({"lx": 1.0, "x": -lam}, ">", -slack, absolute=True)])
        if w is not None:
            w["lambda"] = lam
        return _Sample(-abs(vals["lx"] - lam * vals["x"]), w)

    parts = []
    for name, fn in (
        ("internality", internality),
        ("translation", translation),
        ("lipschitz", lipschitz),
        ("superadditivity", superadditivity),
        ("homogeneity", homogeneity),
    ):
        parts.append(_finish(name, _run(o, "lemma71." + name, samples, seed, fn, workers)))
    failed = [c for c in parts if c.failed]
    return Check(
        "lemma71",
        "fail" if failed else "pass",
        samples=sum(c.samples for c in parts),
        min_margin=min((c.min_margin for c in parts if c.min_margin is not None), default=None),
        witness=failed[0].witness if failed else None,
        note="; ".join(f"{c.name}: {c.status}" for c in parts),
        subchecks=parts,
    )


def _translation_witness(acts, vals, m, tol) -> dict | None:
    # |U(x+m) - U(x) - m| > tol, with the shift folded into both signs of the constant.
    for sign, op, const in ((1.0, ">", -m - tol), (-1.0, ">", m - tol)):
        cond = _cond({"x+m": sign, "x": -sign}, op, const)
        w = _witness("translation", acts, vals, [cond])
        if w is not None:
            w["shift"] = m
            return w
    return None


# ---------------------------------------------------------------- driver

ALL_CHECKS = (
    "sm",
    "monotone",
    "continuity",
    "wmc",
    "da",
    "disco_additivity",
    "convexity",
    "concavity",
    "wra_p",
    "wra_q",
    "joint_sra",
    "ei",
    "ps",
    "ps2",
    "lemma71",
)

# Event independence and single-measure sophistication characterize solo
# expectiles; a genuine duet fails them, so they are opt-in.
DEFAULT_CHECKS = tuple(c for c in ALL_CHECKS if c not in ("ei", "ps"))


def run_audit(
    o: PreferenceOracle,
    samples: int = 1000,
    seed: int = 0,
    checks: Sequence[str] | None = None,
    tol: Tolerances = DEFAULT_TOL,
    workers: int = 1,
    p: ProbMeasure | None = None,
    q: ProbMeasure | None = None,
) -> AuditReport:
    """Run the named checks (``DEFAULT_CHECKS`` if none) and collect an :class:`AuditReport`.

    ``p`` and ``q`` are the reference measures for the risk-attitude and
    sophistication checks; they default to the oracle's declared duet
    measures. Checks that need a missing measure are reported as skipped.
    """
    names = list(checks) if checks else list(DEFAULT_CHECKS)
    unknown = [c for c in names if c not in ALL_CHECKS]
    if unknown:
        raise InvalidParams(f"unknown checks: {', '.join(unknown)}")
    hp, hq = reference_measures(o)
    p = p or hp
    q = q or hq
    kw = dict(tol=tol, workers=workers)
    out: list[Check] = []
    for name in names:
        if name == "sm":
            out.append(audit_sm(o, samples, seed, **kw))
        elif name == "monotone":
            out.append(audit_monotone(o, samples, seed, **kw))
        elif name == "continuity":
            out.append(audit_continuity(o, samples, seed, **kw))
        elif name == "wmc":
            out.append(audit_wmc(o))
        elif name == "da":
            out.append(audit_da(o, samples, seed, **kw))
        elif name == "disco_additivity":
            out.append(audit_disco_additivity(o, samples, seed, **kw))
        elif name == "convexity":
            out.append(audit_convexity(o, samples, seed, **kw))
        elif name == "concavity":
            out.append(audit_concavity(o, samples, seed, **kw))
        elif name in ("wra_p", "wra_q"):
            m = p if name == "wra_p" else q
            if m is None:
                out.append(Check(name, "skipped", note="needs a reference measure"))
            else:
                out.append(audit_weak_risk_aversion(o, m, samples, seed, name=name, **kw))
        elif name == "joint_sra":
            if not isinstance(o.params, DuetParams) or p is None:
                out.append(Check(name, "skipped", note="needs duet parameters"))
                continue
            try:
                partner = sra_partner(o.params)
            except (InvalidParams, DuetError) as exc:
                out.append(Check(name, "skipped", note=str(exc)))
                continue
            c = audit_joint_sra(o, p, partner, samples, seed, **kw)
            out.append(c)
        elif name == "ei":
            try:
                out.append(audit_event_independence(o, tol))
            except ExhaustionRefused as exc:
                out.append(Check(name, "skipped", note=str(exc)))
        elif name in ("ps", "ps2"):
            if p is None or (name == "ps2" and q is None):
                out.append(Check(name, "skipped", note="needs reference measures"))
            else:
                out.append(audit_probabilistic_sophistication(o, p, samples, seed, q=q if name == "ps2" else None, **kw))
        elif name == "lemma71":
            out.append(audit_lemma71_bundle(o, samples, seed, **kw))
    return AuditReport(o.name, o.n, seed, samples, out)
