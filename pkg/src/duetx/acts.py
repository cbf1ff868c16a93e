"""Real-valued acts, their disappointment events, and second-order dominance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from duetx.errors import InvalidAct
from duetx.measures import FiniteSpace, Measure, check_same_space


@dataclass(frozen=True)
class Act:
    """A payoff per atom. Entries must be finite."""

    v: tuple[float, ...]
    space: FiniteSpace = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        v = tuple(float(a) for a in self.v)
        object.__setattr__(self, "v", v)
        if self.space is None:
            if not v:
                raise InvalidAct("act needs at least one atom")
            object.__setattr__(self, "space", FiniteSpace(len(v)))
        elif len(v) != self.space.n:
            raise InvalidAct(f"{len(v)} payoffs for a space of {self.space.n} atoms")
        if not all(math.isfinite(a) for a in v):
            raise InvalidAct(f"act has non-finite entries: {v!r}")

    @classmethod
    def constant(cls, c: float, n: int) -> Act:
        return cls((float(c),) * n)

    @property
    def n(self) -> int:
        return self.space.n

    def __len__(self) -> int:
        return len(self.v)

    def __iter__(self):
        return iter(self.v)

    def __getitem__(self, i: int) -> float:
        return self.v[i]

    def __add__(self, other: Act) -> Act:
        return add(self, other)

    def __neg__(self) -> Act:
        return Act(tuple(-a for a in self.v), self.space)

    def __sub__(self, other: Act) -> Act:
        return add(self, -other)

    def is_constant(self) -> bool:
        return min(self.v) == max(self.v)

    def tolist(self) -> list[float]:
        return list(self.v)


@dataclass(frozen=True)
class EventSet:
    members: frozenset[int]
    space: FiniteSpace

    def __post_init__(self) -> None:
        members = frozenset(int(i) for i in self.members)
        if any(i < 0 or i >= self.space.n for i in members):
            raise InvalidAct(f"event {sorted(members)} not inside a space of {self.space.n} atoms")
        object.__setattr__(self, "members", members)

    def complement(self) -> EventSet:
        return EventSet(frozenset(range(self.space.n)) - self.members, self.space)

    def __contains__(self, i: int) -> bool:
        return i in self.members

    def __len__(self) -> int:
        return len(self.members)

    def sorted(self) -> list[int]:
        return sorted(self.members)


def as_act(x: Act | Sequence[float]) -> Act:
    return x if isinstance(x, Act) else Act(tuple(x))


def _pair(x: Act, y: Act) -> None:
    check_same_space(x.space, y.space)


def add(x: Act, y: Act) -> Act:
    _pair(x, y)
    return Act(tuple(a + b for a, b in zip(x.v, y.v)), x.space)


def scale(x: Act, lam: float) -> Act:
    return Act(tuple(lam * a for a in x.v), x.space)


def shift(x: Act, m: float) -> Act:
    return Act(tuple(a + m for a in x.v), x.space)


def mix(x: Act, y: Act, lam: float) -> Act:
    """Statewise ``lam * x + (1 - lam) * y``."""
    _pair(x, y)
    return Act(tuple(lam * a + (1.0 - lam) * b for a, b in zip(x.v, y.v)), x.space)


def indicator(space: FiniteSpace, event: EventSet | Iterable[int]) -> Act:
    members = event.members if isinstance(event, EventSet) else frozenset(event)
    if isinstance(event, EventSet):
        check_same_space(space, event.space)
    return Act(tuple(1.0 if i in members else 0.0 for i in range(space.n)), space)


def disappointment_event(x: Act, ce: float) -> EventSet:
    """Atoms paying strictly less than the certainty equivalent ``ce``.

    Ties count as elation.
    """
    return EventSet(frozenset(i for i, a in enumerate(x.v) if a < ce), x.space)


def are_disco(x: Act, cx: float, y: Act, cy: float) -> bool:
    _pair(x, y)
    return disappointment_event(x, cx).members == disappointment_event(y, cy).members


def expected_shortfall_curve(x: Act, m: Measure, points: Sequence[float]) -> list[float]:
    """``t -> E^m[(t - x)_+]`` evaluated at each of ``points``."""
    return [math.fsum(w * (t - a) for w, a in zip(m.w, x.v) if a < t) for t in points]


def ssd_dominates(x: Act, y: Act, p: Measure, tol: float = 0.0) -> bool:
    """Whether ``x`` second-order dominates ``y`` under ``p``.

    ``t -> E[(t - X)_+]`` is piecewise linear with kinks at the payoffs, so
    comparing both curves on the merged payoff set is exact. Past the
    largest payoff both curves have slope ``p(Omega)``.
    """
    _pair(x, y)
    check_same_space(x.space, p.space)
    points = sorted(set(x.v) | set(y.v))
    fx = expected_shortfall_curve(x, p, points)
    fy = expected_shortfall_curve(y, p, points)
    return all(a <= b + tol for a, b in zip(fx, fy))
