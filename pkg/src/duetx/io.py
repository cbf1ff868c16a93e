"""JSON problem files.

A problem file (schema ``duetx.problem/1``)::

    {
      "schema": "duetx.problem/1",
      "space": 4,                      # or a list of atom labels
      "alpha": 0.3,                    # optional
      "P": [0.1, 0.2, 0.3, 0.4],       # or {"weights": [...]}
      "Q": [0.25, 0.25, 0.25, 0.25],
      "acts": {"X": [1, 2, 4, 3]}      # or [{"name": "X", "values": [...]}]
    }

With ``alpha`` present, P and Q are probability measures. Without it they
are read as the raw elation and disappointment weights ``r = alpha P`` and
``h = (1 - alpha) Q``; that form keeps rational inputs exact.

A Gul file (schema ``duetx.gul/1``) carries ``beta``, ``P`` and a utility,
``"identity"`` or ``{"loss": k}`` (payoff ``x`` for gains, ``k x`` for
losses).

Serialization writes floats with ``repr`` (the shortest string that reads
back to the same double), so dump -> load -> dump is byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from duetx.acts import Act
from duetx.errors import DuetError
from duetx.expectile import DuetParams, GenParams, Params, solve_solo
from duetx.gul_aa import GulParams
from duetx.measures import FiniteSpace, Measure, ProbMeasure
from duetx.oracle import PreferenceOracle

PROBLEM_SCHEMA = "duetx.problem/1"
GUL_SCHEMA = "duetx.gul/1"


class ProblemError(DuetError, ValueError):
    """Malformed input; ``path`` locates the offending JSON value."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Problem:
    space: FiniteSpace
    params: Params
    acts: dict[str, Act]

    @property
    def has_alpha(self) -> bool:
        return isinstance(self.params, DuetParams)


def _num(v: Any, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ProblemError(path, f"expected a number, got {type(v).__name__}")
    x = float(v)
    if not math.isfinite(x):
        raise ProblemError(path, "must be finite")
    return x


def _vector(v: Any, n: int, path: str) -> tuple[float, ...]:
    if not isinstance(v, list):
        raise ProblemError(path, "expected a list of numbers")
    if len(v) != n:
        raise ProblemError(path, f"expected {n} entries, got {len(v)}")
    return tuple(_num(x, f"{path}[{i}]") for i, x in enumerate(v))


def _space(v: Any, path: str) -> FiniteSpace:
    if isinstance(v, int) and not isinstance(v, bool):
        if v < 1:
            raise ProblemError(path, "need at least one atom")
        return FiniteSpace(v)
    if isinstance(v, list) and v and all(isinstance(s, str) for s in v):
        try:
            return FiniteSpace.of(v)
        except ValueError as exc:
            raise ProblemError(path, str(exc)) from exc
    raise ProblemError(path, "expected an atom count or a list of labels")


def _weights(v: Any, space: FiniteSpace, path: str) -> tuple[float, ...]:
    if isinstance(v, dict):
        if "space" in v:
            inner = _space(v["space"], f"{path}.space")
            if not inner.compatible(space):
                raise ProblemError(f"{path}.space", "does not match the problem space")
        if "weights" not in v:
            raise ProblemError(path, "missing 'weights'")
        return _vector(v["weights"], space.n, f"{path}.weights")
    return _vector(v, space.n, path)


def _object(doc: Any, path: str = "$") -> dict:
    if not isinstance(doc, dict):
        raise ProblemError(path, "expected a JSON object")
    return doc


def _schema(doc: dict, expected: str) -> None:
    if "schema" in doc and doc["schema"] != expected:
        raise ProblemError("$.schema", f"expected {expected!r}, got {doc['schema']!r}")


def _require(doc: dict, key: str) -> Any:
    if key not in doc:
        raise ProblemError("$", f"missing '{key}'")
    return doc[key]


def parse_problem(doc: Any) -> Problem:
    doc = _object(doc)
    _schema(doc, PROBLEM_SCHEMA)
    space = _space(_require(doc, "space"), "$.space")
    pw = _weights(_require(doc, "P"), space, "$.P")
    qw = _weights(_require(doc, "Q"), space, "$.Q")
    try:
        if "alpha" in doc:
            alpha = _num(doc["alpha"], "$.alpha")
            try:
                p = ProbMeasure(pw, space)
            except ValueError as exc:
                raise ProblemError("$.P", str(exc)) from exc
            try:
                q = ProbMeasure(qw, space)
            except ValueError as exc:
                raise ProblemError("$.Q", str(exc)) from exc
            params: Params = DuetParams(alpha, p, q)
        else:
            try:
                r = Measure(pw, space)
            except ValueError as exc:
                raise ProblemError("$.P", str(exc)) from exc
            try:
                h = Measure(qw, space)
            except ValueError as exc:
                raise ProblemError("$.Q", str(exc)) from exc
            params = GenParams(r, h)
    except ProblemError:
        raise
    except ValueError as exc:
        raise ProblemError("$", str(exc)) from exc
    acts: dict[str, Act] = {}
    raw = doc.get("acts", {})
    if isinstance(raw, dict):
        items = [(name, vals, f"$.acts.{name}") for name, vals in raw.items()]
    elif isinstance(raw, list):
        items = []
        for i, entry in enumerate(raw):
            entry = _object(entry, f"$.acts[{i}]")
            name = entry.get("name")
            if not isinstance(name, str):
                raise ProblemError(f"$.acts[{i}].name", "expected a string")
            items.append((name, entry.get("values"), f"$.acts[{i}].values"))
    else:
        raise ProblemError("$.acts", "expected an object or a list")
    for name, vals, path in items:
        if name in acts:
            raise ProblemError(path, f"duplicate act name {name!r}")
        acts[name] = Act(_vector(vals, space.n, path), space)
    return Problem(space, params, acts)


def _read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemError(str(path), exc.strerror or str(exc)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc


def load_problem(path: str | Path) -> Problem:
    return parse_problem(_read_json(path))


def problem_to_dict(problem: Problem) -> dict:
    space = problem.space
    out: dict[str, Any] = {"schema": PROBLEM_SCHEMA, "space": list(space.labels) if space.labels else space.n}
    params = problem.params
    if isinstance(params, DuetParams):
        out["alpha"] = params.alpha
        out["P"], out["Q"] = list(params.p.w), list(params.q.w)
    else:
        out["P"], out["Q"] = list(params.r.w), list(params.h.w)
    out["acts"] = {name: list(a.v) for name, a in problem.acts.items()}
    return out


def dumps(obj: Any) -> str:
    """Canonical JSON text: two-space indent, floats by ``repr``, trailing newline."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def dumps_problem(problem: Problem) -> str:
    return dumps(problem_to_dict(problem))


# ---------------------------------------------------------------- Gul files


def _utility(v: Any, path: str) -> tuple[Callable[[float], float], Callable[[float], float]]:
    # Utilities must be invertible on the whole line: a bounded utility
    # such as CARA saturates in floating point and loses its inverse.
    if v == "identity":
        return float, float
    if isinstance(v, dict) and set(v) == {"loss"}:
        k = _num(v["loss"], f"{path}.loss")
        if k <= 0.0:
            raise ProblemError(f"{path}.loss", "must be positive")
        return (lambda x: x if x >= 0.0 else k * x), (lambda y: y if y >= 0.0 else y / k)
    raise ProblemError(path, "expected \"identity\" or {\"loss\": k}")


def parse_gul(doc: Any) -> tuple[GulParams, ProbMeasure, Callable[[float], float]]:
    """Returns the Gul parameters, the belief ``P`` and the inverse utility."""
    doc = _object(doc)
    _schema(doc, GUL_SCHEMA)
    space = _space(_require(doc, "space"), "$.space")
    beta = _num(_require(doc, "beta"), "$.beta")
    try:
        p = ProbMeasure(_weights(_require(doc, "P"), space, "$.P"), space)
    except ProblemError:
        raise
    except ValueError as exc:
        raise ProblemError("$.P", str(exc)) from exc
    u, inv = _utility(doc.get("utility", "identity"), "$.utility")
    try:
        params = GulParams(beta, u)
    except ValueError as exc:
        raise ProblemError("$.beta", str(exc)) from exc
    return params, p, inv


def gul_oracle(params: GulParams, p: ProbMeasure, inverse: Callable[[float], float], name: str = "gul") -> PreferenceOracle:
    """Money certainty equivalent ``u^-1(Ex_alpha^P(u(x)))`` of Gul's model on acts.

    With the identity utility this is the solo expectile, and its
    parameters are attached as the audit hint.
    """
    alpha, u = params.alpha, params.u

    def U(a: Act) -> float:
        return inverse(solve_solo(alpha, p, tuple(u(x) for x in a.v)))

    hint = DuetParams(alpha, p, p) if u is float else None
    return PreferenceOracle(p.space, U, name=name, params=hint)


def load_gul(path: str | Path) -> PreferenceOracle:
    params, p, inv = parse_gul(_read_json(path))
    return gul_oracle(params, p, inv, name=f"gul({Path(path).name})")
