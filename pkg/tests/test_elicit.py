import numpy as np
import pytest

from duetx.axioms import run_audit
from duetx.elicit import ElicitationResult, elicit, fit_ratios, indifference_ratio, ratio_chains, validate
from duetx.errors import ElicitationFailed, InvalidParams, Unsupported
from duetx.expectile import DuetParams
from duetx.gallery import C1_CHAIN_POINTS, fixture_c1_tripartite, fixture_c2_cylinder
from duetx.measures import ProbMeasure
from duetx.oracle import duet_oracle

from strategies import random_strict


def tv(a, b):
    return 0.5 * sum(abs(x - y) for x, y in zip(a, b))


def test_round_trip_n5():
    params = random_strict(np.random.default_rng(0), 5, concordant=True, floor=0.01)
    res = elicit(duet_oracle(params))
    assert res.recovered
    assert abs(res.alpha - params.alpha) <= 1e-8
    assert tv(res.p.w, params.p.w) <= 1e-8 and tv(res.q.w, params.q.w) <= 1e-8
    assert res.validation <= 1e-6


def test_mean_oracle():
    p = ProbMeasure((0.2, 0.3, 0.5))
    res = elicit(duet_oracle(DuetParams(0.5, p, p)))
    assert abs(res.alpha - 0.5) <= 1e-9
    assert tv(res.p.w, p.w) <= 1e-9 and tv(res.q.w, p.w) <= 1e-9


def test_indifference_ratio_is_r_over_h():
    params = DuetParams.from_weights(0.4, (0.2, 0.3, 0.5), (0.3, 0.3, 0.4))
    c = indifference_ratio(duet_oracle(params), 0, 2)
    assert abs(c - params.r[0] / params.h[2]) <= 1e-12


def test_c1_inconsistent():
    res = elicit(fixture_c1_tripartite())
    assert res.status == "inconsistent"
    assert res.residual > 0.4
    assert res.validation is None
    with pytest.raises(InvalidParams):
        validate(ElicitationResult(0.5, None, None, 1.0, "inconsistent"), fixture_c1_tripartite(), 4, 0)


def test_c1_ratio_chains():
    out = ratio_chains(fixture_c1_tripartite(), C1_CHAIN_POINTS)
    ratios = []
    for chain in out["chains"]:
        w = chain["weights"]
        base = w[0][1]
        ratios.append(([lab for lab, _ in w], [round(v / base, 6) for _, v in w]))
    assert ratios == [
        (["p1", "q2", "q3"], [1.0, 2.0, 2.0]),
        (["p1", "p2", "q3"], [1.0, 2.0, 2.0]),
        (["p1", "q2", "p3"], [1.0, 2.0, 1.0]),
        (["q1", "p2", "p3"], [1.0, 1.0, 1.0]),
    ]
    assert out["clash"] == pytest.approx(0.5, abs=1e-6)


def test_c2_fails_or_inconsistent():
    try:
        res = elicit(fixture_c2_cylinder(4))
    except ElicitationFailed as exc:
        assert exc.pair is not None
    else:
        assert not res.recovered


def test_needs_three_atoms():
    with pytest.raises(Unsupported):
        elicit(duet_oracle(DuetParams.from_weights(0.3, (0.5, 0.5), (0.5, 0.5))))
    with pytest.raises(Unsupported):
        fit_ratios([[1.0, 2.0], [0.5, 1.0]])


def test_recovered_params_pass_audit():
    params = random_strict(np.random.default_rng(1), 4, concordant=True, floor=0.01)
    o = duet_oracle(params)
    res = elicit(o)
    assert res.recovered
    assert validate(res, o, 32, 3) <= 1e-6
    rep = run_audit(duet_oracle(res.params()), 100, 0)
    assert rep.ok


def test_to_dict_keys():
    p = ProbMeasure((0.2, 0.3, 0.5))
    d = elicit(duet_oracle(DuetParams(0.4, p, p))).to_dict()
    assert set(d) == {"alpha", "P", "Q", "residual", "status", "validation"}
