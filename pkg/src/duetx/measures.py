"""Finite spaces and nonnegative measures on their power set.

Measures are dense weight vectors; on a finite space every setwise
statement reduces to an atomwise one, so comparisons work atom by atom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from duetx.errors import InvalidMeasure, SpaceMismatch

if TYPE_CHECKING:
    from duetx.acts import Act

PROB_TOL = 1e-12


@dataclass(frozen=True)
class FiniteSpace:
    """The state space {0, ..., n-1}, optionally with atom labels."""

    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidMeasure(f"space needs at least one atom, got n={self.n!r}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.n:
                raise InvalidMeasure(f"{len(labels)} labels for {self.n} atoms")
            if len(set(labels)) != self.n:
                raise InvalidMeasure("atom labels must be distinct")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def of(cls, labels: Sequence[str]) -> FiniteSpace:
        return cls(len(labels), tuple(labels))

    def names(self) -> list[str]:
        if self.labels is not None:
            return list(self.labels)
        return [f"s{i + 1}" for i in range(self.n)]

    def compatible(self, other: FiniteSpace) -> bool:
        # Unlabelled spaces are compatible with any labelling of the same size.
        if self.n != other.n:
            return False
        return self.labels is None or other.labels is None or self.labels == other.labels


def check_same_space(a: FiniteSpace, b: FiniteSpace) -> None:
    if not a.compatible(b):
        raise SpaceMismatch(f"space of size {a.n} vs space of size {b.n}")


@dataclass(frozen=True)
class Measure:
    """Nonnegative weights on the atoms of a finite space.

    A zero-total measure can only be produced by :func:`meet`; it is
    flagged through :attr:`degenerate` and rejected by everything that
    needs to normalize it.
    """

    w: tuple[float, ...]
    space: FiniteSpace = None  # type: ignore[assignment]
    _allow_zero: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        w = tuple(float(v) for v in self.w)
        object.__setattr__(self, "w", w)
        if self.space is None:
            if not w:
                raise InvalidMeasure("measure needs at least one atom")
            object.__setattr__(self, "space", FiniteSpace(len(w)))
        elif len(w) != self.space.n:
            raise InvalidMeasure(f"{len(w)} weights for a space of {self.space.n} atoms")
        for i, v in enumerate(w):
            if not math.isfinite(v) or v < 0.0:
                raise InvalidMeasure(f"weight {i} is {v!r}; weights must be finite and >= 0")
        if not self._allow_zero and self.total <= 0.0:
            raise InvalidMeasure("measure has zero total mass")

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def total(self) -> float:
        return math.fsum(self.w)

    @property
    def degenerate(self) -> bool:
        return self.total <= 0.0

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self.w) if v > 0.0)

    @property
    def strict(self) -> bool:
        return all(v > 0.0 for v in self.w)

    def scale(self, c: float) -> Measure:
        if c <= 0.0:
            raise InvalidMeasure(f"scale factor must be positive, got {c!r}")
        return Measure(tuple(c * v for v in self.w), self.space)

    def mass(self, atoms: Iterable[int]) -> float:
        return math.fsum(self.w[i] for i in atoms)

    def expect(self, x: Act | Sequence[float]) -> float:
        """Integral of ``x`` against this measure (no normalization)."""
        values = getattr(x, "v", x)
        if len(values) != self.n:
            raise SpaceMismatch(f"act of length {len(values)} on a space of {self.n} atoms")
        return math.fsum(wi * xi for wi, xi in zip(self.w, values))

    def __len__(self) -> int:
        return self.n


class ProbMeasure(Measure):
    """A measure whose weights sum to one (within 1e-12)."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if abs(self.total - 1.0) > PROB_TOL:
            raise InvalidMeasure(f"probability weights sum to {self.total!r}, not 1")

    @classmethod
    def uniform(cls, n: int, space: FiniteSpace | None = None) -> ProbMeasure:
        return cls(tuple([1.0 / n] * n), space or FiniteSpace(n))

    @classmethod
    def dirac(cls, n: int, atom: int) -> ProbMeasure:
        w = [0.0] * n
        w[atom] = 1.0
        return cls(tuple(w))


def normalize(m: Measure) -> ProbMeasure:
    """Divide by the total mass.

    Measures already summing to one within 1e-12 keep their weights bit for
    bit, which makes the operation exactly idempotent.
    """
    total = m.total
    if total <= 0.0:
        raise InvalidMeasure("cannot normalize a measure with zero total mass")
    if abs(total - 1.0) <= PROB_TOL:
        return ProbMeasure(m.w, m.space)
    return ProbMeasure(tuple(v / total for v in m.w), m.space)


def join(p: Measure, q: Measure) -> Measure:
    check_same_space(p.space, q.space)
    return Measure(tuple(max(a, b) for a, b in zip(p.w, q.w)), p.space)


def meet(p: Measure, q: Measure) -> Measure:
    """Atomwise minimum; may be degenerate (zero total)."""
    check_same_space(p.space, q.space)
    return Measure(tuple(min(a, b) for a, b in zip(p.w, q.w)), p.space, _allow_zero=True)


def leq(p: Measure, q: Measure) -> bool:
    """``p(S) <= q(S)`` for every event S, decided atom by atom with exact comparisons."""
    check_same_space(p.space, q.space)
    return all(a <= b for a, b in zip(p.w, q.w))


def mutually_ac(p: Measure, q: Measure) -> bool:
    check_same_space(p.space, q.space)
    return p.support == q.support


def l1_distance(x: Act | Sequence[float], y: Act | Sequence[float], m: Measure) -> float:
    xv = getattr(x, "v", x)
    yv = getattr(y, "v", y)
    if len(xv) != m.n or len(yv) != m.n:
        raise SpaceMismatch("acts and measure live on different spaces")
    return math.fsum(w * abs(a - b) for w, a, b in zip(m.w, xv, yv))
