"""Black-box certainty equivalents."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

from duetx.acts import Act, as_act
from duetx.expectile import DuetParams, GenParams, Params, expectile, weights
from duetx.measures import FiniteSpace


@dataclass(frozen=True)
class PreferenceOracle:
    """A certainty equivalent ``U`` on acts over ``space``.

    ``serial`` marks oracles that must not be called from several threads
    at once. ``params`` optionally carries the duet parameters behind the
    oracle; audits may use it to aim their probes, but every verdict is
    still decided by calling ``U``.
    """

    space: FiniteSpace
    U: Callable[[Act], float]
    name: str = "oracle"
    serial: bool = False
    params: Any = None

    @property
    def n(self) -> int:
        return self.space.n

    def __call__(self, x: Act | Sequence[float]) -> float:
        return float(self.U(as_act(x)))


def duet_oracle(params: Params, name: str | None = None) -> PreferenceOracle:
    r, h = weights(params)
    r, h = tuple(r), tuple(h)
    space = params.p.space if isinstance(params, DuetParams) else params.r.space
    if name is None:
        name = f"duet(alpha={params.alpha!r})" if isinstance(params, DuetParams) else "duet(gen)"
    return PreferenceOracle(space, lambda a: expectile(r, h, a.v), name=name, params=params)


def functional_oracle(f: Callable[[Sequence[float]], float], n: int, name: str, serial: bool = False) -> PreferenceOracle:
    """Wrap a plain function of the payoff vector."""
    return PreferenceOracle(FiniteSpace(n), lambda a: f(a.v), name=name, serial=serial)


__all__ = ["PreferenceOracle", "duet_oracle", "functional_oracle", "GenParams"]
