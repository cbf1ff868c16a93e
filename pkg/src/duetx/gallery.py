"""Counterexample fixtures with their assertion bundles.

- c1: a region-wise linear functional on three atoms satisfying SM, C
  and DA that is not a duet expectile.
- c2: its cylindrical extension to n >= 4 atoms: monotone but not
  strictly, still not representable.
- c3: a four-atom duet that is not jointly strongly risk averse under its
  own normalized measures.
- c4: two atoms, where preference convexity is decided by a product
  inequality instead of atomwise concordance.
- c5: Dirac weighting measures, where the risk-attitude equivalences break
  down without strict monotonicity.
"""

from __future__ import annotations

import itertools
import time
from typing import Callable, Sequence

import numpy as np

from duetx.acts import Act, ssd_dominates
from duetx.axioms import (
    Check,
    audit_concavity,
    audit_continuity,
    audit_convexity,
    audit_da,
    audit_joint_sra,
    audit_lemma71_bundle,
    audit_monotone,
    audit_sm,
    audit_weak_risk_aversion,
    replay,
    sra_partner,
)
from duetx.elicit import elicit, ratio_chains
from duetx.errors import ElicitationFailed, InvalidParams
from duetx.expectile import DuetParams, GenParams, solve_duet, solve_gen
from duetx.measures import FiniteSpace, normalize
from duetx.oracle import PreferenceOracle, duet_oracle

NAMES = ("c1", "c2", "c3", "c4", "c5")
AGREE_TOL = 1e-12

# ---------------------------------------------------------------- c1

_REGIONS: tuple[tuple[str, str, Callable[[float, float, float], bool]], ...] = (
    ("A1", "A", lambda x, y, z: x >= y >= z),
    ("A2", "A", lambda x, y, z: x >= z >= y and x + 2 * y >= 3 * z),
    ("A3", "A", lambda x, y, z: y >= x >= z and y + z <= 2 * x),
    ("B1", "B", lambda x, y, z: z >= x >= y),
    ("B2", "B", lambda x, y, z: x >= z >= y and x + 2 * y <= 3 * z),
    ("B3", "B", lambda x, y, z: z >= y >= x and x + z >= 2 * y),
    ("C1", "C", lambda x, y, z: y >= z >= x),
    ("C2", "C", lambda x, y, z: z >= y >= x and x + z <= 2 * y),
    ("C3", "C", lambda x, y, z: y >= x >= z and y + z >= 2 * x),
)

_PIECES = {
    "A": lambda x, y, z: (x + 2 * y + 2 * z) / 5,
    "B": lambda x, y, z: (x + 2 * y + z) / 4,
    "C": lambda x, y, z: (x + y + z) / 3,
}

# Interior points of A2, A3, B2 and C2, where the local weights of a duet
# expectile would have to match the four linear pieces.
C1_CHAIN_POINTS = ((3.0, 0.0, 0.5), (1.0, 1.5, 0.0), (1.0, 0.0, 0.9), (0.0, 1.0, 1.5))


def c1_regions(x: float, y: float, z: float) -> list[str]:
    return [name for name, _, pred in _REGIONS if pred(x, y, z)]


def c1_value(x: float, y: float, z: float) -> float:
    """The c1 functional. Every matching region is evaluated and the pieces
    must agree to within 1e-12 (relative to the payoff size)."""
    groups = sorted({g for _, g, pred in _REGIONS if pred(x, y, z)})
    if not groups:
        raise ValueError(f"({x}, {y}, {z}) lies in no region")
    vals = [_PIECES[g](x, y, z) for g in groups]
    spread = max(vals) - min(vals)
    if spread > AGREE_TOL * max(1.0, abs(x), abs(y), abs(z)):
        raise ValueError(f"pieces {groups} disagree by {spread!r} at ({x}, {y}, {z})")
    return vals[0]


def fixture_c1_tripartite() -> PreferenceOracle:
    return PreferenceOracle(FiniteSpace(3), lambda a: c1_value(*a.v), name="c1")


def fixture_c2_cylinder(n: int) -> PreferenceOracle:
    if n < 4:
        raise InvalidParams("the cylindrical extension needs n >= 4")
    return PreferenceOracle(FiniteSpace(n), lambda a: c1_value(*a.v[:3]), name=f"c2({n})")


# ---------------------------------------------------------------- c3

C3_R = (0.25, 0.5, 0.75, 1.0)
C3_H = (1.0, 1.0, 1.0, 1.0)
C3_X = (1.0, 2.0, 4.0, 3.0)
C3_Y = (2.0, 1.0, 3.0, 4.0)


def c3_gen() -> GenParams:
    """The un-normalized pair: densities 1/4, 2/4, 3/4, 1 against Lebesgue quarters."""
    return GenParams.from_weights(C3_R, C3_H)


def fixture_c3_jointsra() -> tuple[DuetParams, Act, Act]:
    return c3_gen().to_duet(), Act(C3_X), Act(C3_Y)


# ---------------------------------------------------------------- helpers


def _assert(name: str, ok: bool, note: str = "", witness: dict | None = None) -> Check:
    return Check(name, "pass" if ok else "fail", samples=1, note=note, witness=None if ok else witness)


def _expect_fail(check: Check, o: PreferenceOracle, label: str) -> Check:
    """Pass iff ``check`` failed with a witness that replays through ``o``."""
    ok = check.failed and check.witness is not None and replay(check.witness, o)
    return Check(label, "pass" if ok else "fail", samples=check.samples, min_margin=check.min_margin,
                 witness=check.witness, note=f"expected failure of {check.name}: {check.status}",
                 subchecks=[check])


def _rename(check: Check, label: str) -> Check:
    check.name = label
    return check


def reflected(o: PreferenceOracle) -> PreferenceOracle:
    """``x -> -U(-x)``: turns convexity into concavity and risk seeking into aversion."""
    return PreferenceOracle(o.space, lambda a: -o(tuple(-v for v in a.v)), name=f"reflected({o.name})",
                            serial=o.serial)


# ---------------------------------------------------------------- bundles


def bundle_c1(samples: int = 1000, seed: int = 0) -> list[Check]:
    o = fixture_c1_tripartite()
    out = [
        _assert("c1.constant", c1_value(1.0, 1.0, 1.0) == 1.0, "f(1,1,1) = 1"),
        _assert("c1.f(5,0,0)", c1_value(5.0, 0.0, 0.0) == 1.0 and "A1" in c1_regions(5.0, 0.0, 0.0),
                "region A1, value 5/5"),
    ]
    # Boundary agreement: points on every separating plane, evaluated with all matching pieces.
    rng = np.random.default_rng([seed, 1])
    planes = (
        np.array([1.0, -1.0, 0.0]), np.array([0.0, 1.0, -1.0]), np.array([1.0, 0.0, -1.0]),
        np.array([1.0, 2.0, -3.0]), np.array([-2.0, 1.0, 1.0]), np.array([1.0, -2.0, 1.0]),
    )
    disagreements = 0
    uncovered = 0
    checked = 0
    for k in range(samples):
        v = rng.normal(size=3) * 10.0 ** rng.uniform(-2, 2)
        nrm = planes[k % len(planes)]
        v = v - (v @ nrm) / (nrm @ nrm) * nrm
        x, y, z = (float(a) for a in v)
        checked += 1
        if not c1_regions(x, y, z):
            uncovered += 1
            continue
        try:
            c1_value(x, y, z)
        except ValueError:
            disagreements += 1
    out.append(_assert("c1.well_defined", disagreements == 0 and uncovered == 0,
                       f"{checked} boundary points, {disagreements} disagreements, {uncovered} uncovered"))
    out.append(audit_sm(o, samples, seed))
    out.append(audit_continuity(o, samples, seed))
    out.append(audit_da(o, samples, seed))
    out.append(audit_lemma71_bundle(o, samples, seed))
    res = elicit(o)
    chains = ratio_chains(o, C1_CHAIN_POINTS)
    out.append(_assert("c1.elicit_inconsistent", res.status == "inconsistent" and res.residual > 0.05,
                       f"status {res.status}, residual {res.residual!r}"))
    out.append(_assert("c1.ratio_chains", chains["clash"] > 0.05,
                       f"local weight chains clash by {chains['clash']!r}"))
    return out


def bundle_c2(n: int = 4, samples: int = 1000, seed: int = 0) -> list[Check]:
    o = fixture_c2_cylinder(n)
    rng = np.random.default_rng([seed, 2])
    invariant = True
    for _ in range(100):
        v = rng.normal(size=n)
        w = v.copy()
        w[3:] = rng.normal(size=n - 3) * 100.0
        invariant &= o(tuple(v)) == o(tuple(w))
    out = [_assert("c2.cylinder", invariant, f"U ignores atoms 4..{n}")]
    out.append(_expect_fail(audit_sm(o, samples, seed), o, "c2.sm_fails"))
    out.append(audit_monotone(o, samples, seed))
    out.append(audit_da(o, samples, seed))
    try:
        res = elicit(o)
        ok = res.status == "inconsistent"
        note = f"status {res.status}, residual {res.residual!r}"
    except ElicitationFailed as exc:
        ok = True
        note = f"elicitation failed on pair {exc.pair}: {exc}"
    out.append(_assert("c2.not_representable", ok, note))
    return out


def bundle_c3(samples: int = 1000, seed: int = 0) -> list[Check]:
    gen = c3_gen()
    params, X, Y = fixture_c3_jointsra()
    t0 = time.perf_counter()
    ex, ey = solve_gen(gen, X), solve_gen(gen, Y)
    elapsed = time.perf_counter() - t0
    dx, dy = solve_duet(params, X), solve_duet(params, Y)
    p, q = params.p, params.q
    out = [
        _assert("c3.ex_x", abs(ex - 12 / 5) <= 1e-12 and abs(dx - 12 / 5) <= 1e-12, f"Ex(X) = {ex!r}"),
        _assert("c3.ex_y", abs(ey - 37 / 15) <= 1e-12 and abs(dy - 37 / 15) <= 1e-12, f"Ex(Y) = {ey!r}"),
        _assert("c3.ssd_p", ssd_dominates(X, Y, p), "X dominates Y in second order under normalized P"),
        _assert("c3.ssd_q", ssd_dominates(X, Y, q), "X dominates Y in second order under normalized Q"),
        _assert("c3.reversal", ex < ey and dx < dy, "Ex(X) < Ex(Y)"),
        # The measured time stays out of the report so reports are reproducible.
        _assert("c3.runtime", elapsed < 1e-3, "two solves under 1 ms"),
    ]
    o = duet_oracle(params, name="c3")
    out.append(_expect_fail(audit_joint_sra(o, p, q, samples, seed, candidates=[(X.v, Y.v)]), o, "c3.joint_sra_fails"))
    out.append(_rename(audit_joint_sra(o, p, sra_partner(params), samples, seed), "c3.joint_sra_partner"))
    return out


def c4_criterion(p1: float, p2: float, q1: float, q2: float) -> bool:
    return p1 * p2 <= q1 * q2


def fixture_c4_twoatom(p1: float, p2: float, q1: float, q2: float, samples: int = 0, seed: int = 0) -> Check:
    """Audit preference convexity of the two-atom pair ``r = (p1, p2)``,
    ``h = (q1, q2)`` and compare with ``p1 p2 <= q1 q2``."""
    if min(p1, p2, q1, q2) <= 0.0:
        raise InvalidParams("c4 needs positive weights")
    o = duet_oracle(GenParams.from_weights((p1, p2), (q1, q2)), name=f"c4({p1},{p2},{q1},{q2})")
    # The indifference pair through 1_1 - c12 1_2 and 1_2 - c21 1_1; its
    # midpoint drops below zero exactly when c12 c21 > 1.
    c12, c21 = p1 / q2, p2 / q1
    pair = ((2.0 * c21, -2.0 * c21 * c12), (-2.0 * c21, 2.0))
    audit = audit_convexity(o, samples, seed, candidates=[pair])
    expect = c4_criterion(p1, p2, q1, q2)
    match = audit.passed == expect and (expect or (audit.witness is not None and replay(audit.witness, o)))
    return Check("c4", "pass" if match else "fail", samples=audit.samples, min_margin=audit.min_margin,
                 witness=audit.witness,
                 note=f"criterion p1*p2 <= q1*q2 is {expect}; convexity audit {audit.status}",
                 subchecks=[audit])


def bundle_c4(samples: int = 200, seed: int = 0, grid: Sequence[float] = (1, 2, 3, 5)) -> list[Check]:
    out = [
        _rename(fixture_c4_twoatom(1, 1, 2, 2, samples, seed), "c4.(1,1|2,2)"),
        _rename(fixture_c4_twoatom(2, 2, 1, 1, samples, seed), "c4.(2,2|1,1)"),
        _rename(fixture_c4_twoatom(2, 3, 1, 6, samples, seed), "c4.boundary(2,3|1,6)"),
    ]
    bad = []
    count = 0
    for w in itertools.product(grid, repeat=4):
        count += 1
        if not fixture_c4_twoatom(*w, samples=0).passed:
            bad.append(w)
    out.append(_assert("c4.grid", not bad, f"{count} grid points, mismatches: {bad[:5]}"))
    return out


def bundle_c5(n: int = 4, samples: int = 1000, seed: int = 0) -> list[Check]:
    if n < 4:
        raise InvalidParams("c5 needs n >= 4")
    dirac = (2.0,) + (0.0,) * (n - 1)
    flat = (1.0,) * n
    out = []
    # (i) P concentrated on atom 1: concave, weakly risk averse under P~, not SM.
    gi = GenParams.from_weights(dirac, flat)
    oi = duet_oracle(gi, name="c5.i")
    out.append(_assert("c5.i.not_concordant", not gi.concordant, "P <= Q fails"))
    out.append(_rename(audit_concavity(oi, samples, seed), "c5.i.concave"))
    out.append(_rename(audit_weak_risk_aversion(oi, normalize(gi.r), samples, seed), "c5.i.wra_p"))
    out.append(_expect_fail(audit_sm(oi, samples, seed), oi, "c5.i.sm_fails"))
    # (ii) Q concentrated on atom 1: convex, weakly risk seeking under Q~, not SM.
    gii = GenParams.from_weights(flat, dirac)
    oii = duet_oracle(gii, name="c5.ii")
    mirror = reflected(oii)
    out.append(_rename(audit_concavity(mirror, samples, seed), "c5.ii.convex"))
    out.append(_rename(audit_weak_risk_aversion(mirror, normalize(gii.h), samples, seed), "c5.ii.wrs_q"))
    out.append(_expect_fail(audit_sm(oii, samples, seed), oii, "c5.ii.sm_fails"))
    return out


def fixture_c5_dirac(n: int = 4, samples: int = 1000, seed: int = 0) -> list[Check]:
    return bundle_c5(n, samples, seed)


def run_bundle(name: str, samples: int = 1000, seed: int = 0) -> list[Check]:
    if name == "c1":
        return bundle_c1(samples, seed)
    if name == "c2":
        return bundle_c2(4, samples, seed)
    if name == "c3":
        return bundle_c3(samples, seed)
    if name == "c4":
        return bundle_c4(min(samples, 200), seed)
    if name == "c5":
        return bundle_c5(4, samples, seed)
    raise InvalidParams(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
