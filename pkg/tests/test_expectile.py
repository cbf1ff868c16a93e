import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from duetx.errors import DegenerateMeet, InvalidParams
from duetx.expectile import (
    DuetParams,
    GenParams,
    concavity_witness,
    expectile,
    indicator_value,
    lipschitz_bounds,
    ratio_identity_residual,
    solve,
    solve_duet,
    solve_gen,
    solve_solo,
)
from duetx.measures import Measure, ProbMeasure, normalize

from strategies import acts, duet_params, duet_with_act, random_strict, reference_expectile

C3_R = (0.25, 0.5, 0.75, 1.0)
C3_H = (1.0, 1.0, 1.0, 1.0)
X = (1.0, 2.0, 4.0, 3.0)
Y = (2.0, 1.0, 3.0, 4.0)


def c3_duet():
    return DuetParams(2.5 / 6.5, normalize(Measure(C3_R)), ProbMeasure.uniform(4))


def test_c3_values_exact_in_weight_form():
    g = GenParams.from_weights(C3_R, C3_H)
    assert solve_gen(g, X) == 12 / 5
    assert solve_gen(g, Y) == 37 / 15


def test_c3_values_duet_form():
    p = c3_duet()
    assert abs(solve_duet(p, X) - 12 / 5) <= 1e-12
    assert abs(solve_duet(p, Y) - 37 / 15) <= 1e-12


def test_constant_act():
    p = c3_duet()
    for c in (-3.5, 0.0, 7.25):
        assert solve_duet(p, (c,) * 4) == c


def test_bi_atomic_closed_form():
    assert solve_duet(DuetParams.from_weights(0.25, (0.5, 0.5), (0.5, 0.5)), (0.0, 1.0)) == 0.25
    assert solve_solo(0.25, ProbMeasure.uniform(2), (0.0, 1.0)) == 0.25


def test_solo_half_is_mean():
    p = ProbMeasure((0.2, 0.3, 0.5))
    x = (1.0, -2.0, 4.0)
    assert math.isclose(solve_solo(0.5, p, x), p.expect(x), abs_tol=1e-14)


def test_solo_degenerate_prior():
    for a in (0.1, 0.5, 0.9):
        assert solve_solo(a, ProbMeasure.dirac(3, 1), (5.0, -2.0, 9.0)) == -2.0


def test_gen_r_equals_h_is_mean():
    r = (1.0, 3.0, 4.0)
    x = (2.0, -1.0, 0.5)
    assert math.isclose(solve_gen(GenParams.from_weights(r, r), x), normalize(Measure(r)).expect(x), abs_tol=1e-14)


def test_indicator_closed_form_examples():
    p = c3_duet()
    for event in ({0}, {1, 3}, {0, 1, 2}):
        pa = sum(p.p.w[i] for i in event)
        qc = sum(p.q.w[i] for i in range(4) if i not in event)
        want = p.alpha * pa / (p.alpha * pa + (1 - p.alpha) * qc)
        assert abs(indicator_value(p, event) - want) <= 1e-12
        assert abs(solve_duet(p, [1.0 if i in event else 0.0 for i in range(4)]) - want) <= 1e-12


def test_invalid_alpha():
    for a in (0.0, 1.0, -0.2, float("nan")):
        with pytest.raises(InvalidParams):
            DuetParams(a, ProbMeasure.uniform(2), ProbMeasure.uniform(2))


def test_length_mismatch():
    with pytest.raises(ValueError):
        solve_duet(c3_duet(), (1.0, 2.0))


def test_lipschitz_examples():
    p = c3_duet()
    assert lipschitz_bounds(p, X, X) == (0.0, 0.0)
    a = 0.3
    pr = ProbMeasure((0.1, 0.2, 0.7))
    solo = DuetParams(a, pr, pr)
    x, y = (1.0, 0.0, 2.0), (0.0, 3.0, 1.5)
    l1 = sum(w * abs(u - v) for w, u, v in zip(pr.w, x, y))
    assert math.isclose(lipschitz_bounds(solo, x, y)[1], (0.7 / 0.3) * l1, rel_tol=1e-12)


def test_lipschitz_degenerate_meet():
    g = GenParams.from_weights((1.0, 0.0), (0.0, 1.0))
    with pytest.raises(DegenerateMeet):
        lipschitz_bounds(g, (0.0, 1.0), (1.0, 0.0))


def test_ratio_identity_examples():
    p = c3_duet()
    assert ratio_identity_residual(p, (2.0,) * 4) == 0.0
    assert ratio_identity_residual(p, X) <= 1e-12


def test_concavity_witness_none_when_concordant():
    assert concavity_witness(c3_duet()) is None


def test_concavity_witness_breaks_concavity():
    g = GenParams.from_weights((0.3, 0.1, 0.2), (0.2, 0.5, 0.4))
    x, y = concavity_witness(g)
    assert solve(g, x) == pytest.approx(solve(g, y), abs=1e-12)
    assert solve(g, [(a + b) / 2 for a, b in zip(x.v, y.v)]) < solve(g, x) - 1e-6


def test_random_against_reference():
    rng = np.random.default_rng(7)
    for _ in range(300):
        p = random_strict(rng, int(rng.integers(1, 11)))
        x = tuple((rng.normal(size=p.n) * 10.0 ** rng.uniform(-2, 3)).tolist())
        want = reference_expectile(p.r, p.h, x)
        assert abs(solve_duet(p, x) - want) <= 1e-12 * max(1.0, max(map(abs, x)))


def test_ties_and_zero_weights():
    # all mass on tied payoffs, zero weights elsewhere
    assert expectile((0.0, 0.5, 0.5), (0.0, 0.5, 0.5), (9.0, 1.0, 1.0)) == 1.0
    # the balance equation vanishes on all of [3, 5]; the infimum is returned
    assert expectile((1.0, 0.0), (0.0, 1.0), (3.0, 5.0)) == 3.0
    assert expectile((0.0, 1.0), (1.0, 0.0), (3.0, 5.0)) == 4.0


@given(duet_with_act())
def test_balance_equation_holds(data):
    p, x = data
    z = solve_duet(p, x)
    gain = math.fsum(r * (a - z) for r, a in zip(p.r, x) if a > z)
    loss = math.fsum(h * (z - a) for h, a in zip(p.h, x) if a < z)
    assert abs(gain - loss) <= 1e-9 * (1 + max(map(abs, x)))
    assert min(x) <= z <= max(x)


@given(duet_with_act(), st.floats(-100, 100), st.floats(0.01, 100))
def test_translation_and_homogeneity(data, m, lam):
    p, x = data
    z = solve_duet(p, x)
    tol = 1e-9 * (1 + max(map(abs, x)) + abs(m)) * max(1.0, lam)
    assert abs(solve_duet(p, [a + m for a in x]) - (z + m)) <= tol
    assert abs(solve_duet(p, [lam * a for a in x]) - lam * z) <= tol


@given(duet_with_act(), st.data())
def test_monotone(data, draw):
    p, x = data
    bumps = draw.draw(st.lists(st.floats(0, 10), min_size=p.n, max_size=p.n))
    y = [a + b for a, b in zip(x, bumps)]
    assert solve_duet(p, y) >= solve_duet(p, x) - 1e-9 * (1 + max(map(abs, y)))


@given(st.data())
def test_strictly_monotone_on_strict_params(data):
    p = data.draw(duet_params())
    x = data.draw(acts(p.n))
    i = data.draw(st.integers(0, p.n - 1))
    y = list(x)
    y[i] += 1.0
    assert solve_duet(p, y) > solve_duet(p, x)


@given(duet_with_act(), st.floats(0.01, 100))
def test_gen_scale_invariance(data, lam):
    p, x = data
    g = p.to_gen()
    g2 = GenParams.from_weights([lam * v for v in g.r.w], [lam * v for v in g.h.w])
    assert abs(solve_gen(g2, x) - solve_gen(g, x)) <= 1e-9 * (1 + max(map(abs, x)))


@given(duet_with_act())
def test_gen_duet_roundtrip(data):
    p, x = data
    assert abs(solve_gen(p.to_gen(), x) - solve_duet(p, x)) <= 1e-9 * (1 + max(map(abs, x)))


@given(duet_with_act(n_min=2), st.data())
def test_lipschitz_bounds_hold(data, draw):
    p, x = data
    y = draw.draw(acts(p.n))
    bs, bl = lipschitz_bounds(p, x, y)
    d = abs(solve_duet(p, x) - solve_duet(p, y))
    tol = 1e-9 * (1 + max(map(abs, x + y)))
    assert d <= bs + tol
    assert d <= bl + tol


@given(duet_with_act())
def test_ratio_identity_random(data):
    p, x = data
    assert ratio_identity_residual(p, x) <= 1e-10 * (1 + max(map(abs, x)))


@settings(max_examples=50)
@given(duet_params(n_min=3))
def test_concavity_witness_iff_not_concordant(p):
    w = concavity_witness(p)
    assume(not p.concordant or w is None)
    assert (w is None) == p.concordant
    if w is not None:
        x, y = w
        mid = [(a + b) / 2 for a, b in zip(x.v, y.v)]
        assert solve_duet(p, mid) < (solve_duet(p, x) + solve_duet(p, y)) / 2
