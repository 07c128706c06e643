import random
from fractions import Fraction as F
from itertools import combinations, product

import pytest

from girycheck.extvalue import INF, ZERO, ExtValue
from girycheck.measures import FinMeasure, dirac
from girycheck.metric_ot import (
    brute_force_wasserstein,
    compat_check_2pt,
    compat_check_4pt,
    default_metric,
    discrete_metric,
    equiv_check,
    extended_abs_metric,
    glued_path_metric,
    l1_metric,
    linf_metric,
    order_metric,
    product_sum_metric,
    table_metric,
    wasserstein,
)
from girycheck.sampling import (
    random_discrete_metric,
    random_finite_discrete_space,
    random_measure,
)
from girycheck.spaces import builtin_spaces

REG = builtin_spaces()
UNIT = REG["unit_interval"]
UMETRIC = l1_metric(UNIT)


def unit_measure(*pairs):
    return FinMeasure.from_pairs(UNIT.id, [(UNIT.element(F(x)), F(w)) for x, w in pairs])


# ---------------------------------------------------------------------------
# metrics


def test_l1_metric_values():
    assert UMETRIC(UNIT.element(0), UNIT.element(F(3, 4))) == ExtValue(F(3, 4))
    box = REG["box2"]
    bm = l1_metric(box)
    assert bm(box.element((0, 0)), box.element((1, F(1, 2)))) == ExtValue(F(3, 2))
    lm = linf_metric(box)
    assert lm(box.element((0, 0)), box.element((1, F(1, 2)))) == ExtValue(1)


def test_discrete_and_order_metrics():
    chain = REG["chain-max"]
    dm = discrete_metric(chain)
    assert dm(chain.element("a"), chain.element("a")) == ZERO
    assert dm(chain.element("a"), chain.element("b")) == ExtValue(1)
    om = order_metric(chain)
    assert om(chain.element("a"), chain.element("d")) == ExtValue(3)


def test_extended_abs_metric():
    rinf = REG["rinf-grid"]
    m = extended_abs_metric(rinf)
    assert m(rinf.element(INF), rinf.element(INF)) == ZERO
    assert m(rinf.element(F(2)), rinf.element(INF)).is_inf
    assert m(rinf.element(F(-1)), rinf.element(F(3))) == ExtValue(4)


def test_table_metric_validates():
    two = REG["two"]
    e0, e1 = two.element("0"), two.element("1")
    tm = table_metric(two, {("0", "1"): F(5)})
    assert tm(e1, e0) == ExtValue(5)
    assert tm(e0, e1) == ExtValue(5)
    assert tm(e0, e0) == ZERO


def test_product_sum_metric():
    gd = REG["GxD"]
    m = product_sum_metric(gd)
    x = gd.element((0, 0))
    y = gd.element((F(1, 2), 3))
    assert m(x, y) == ExtValue(F(1, 2) + 3)


def test_glued_path_metric_on_vee():
    vee = REG["vee"]
    m = glued_path_metric(vee)
    same = m(vee.element(("H", F(1, 4))), vee.element(("H", F(3, 4))))
    assert same == ExtValue(F(1, 2))
    cross = m(vee.element(("L", F(1, 4))), vee.element(("H", F(3, 4))))
    # through the glue point at the origin of both arms
    assert cross == ExtValue(1)
    glue = m(vee.element(("L", F(0))), vee.element(("H", F(0))))
    assert glue == ZERO


def test_metric_axioms_sampled():
    rng = random.Random(3)
    for sid in ("unit_interval", "box2", "simplex3", "vee", "rinf-grid", "GxD"):
        space = REG[sid]
        metric = default_metric(space)
        pts = [space.sample_element(rng) for _ in range(12)]
        for x in pts:
            assert metric(x, x) == ZERO
        for x, y in combinations(pts, 2):
            assert metric(x, y) == metric(y, x)
            assert (metric(x, y) == ZERO) == (x == y)
        for x, y, z in combinations(pts, 3):
            assert metric(x, z) <= metric(x, y) + metric(y, z)


def test_metric_rejects_foreign_elements():
    with pytest.raises(ValueError):
        UMETRIC(UNIT.element(0), REG["box2"].element((0, 0)))


# ---------------------------------------------------------------------------
# compatibility checks


def test_interval_metric_is_compatible():
    v = compat_check_2pt(UNIT, UMETRIC, budget=300, rng=random.Random(0))
    assert v.ok
    v4 = compat_check_4pt(UNIT, UMETRIC, budget=300, rng=random.Random(0))
    assert v4.ok


def test_every_multipoint_discrete_space_fails_compat():
    for sid in ("two", "C", "chain-max", "D4-min", "N-min"):
        space = REG[sid]
        v = compat_check_2pt(space, default_metric(space))
        assert not v.ok, sid
        assert v.status == "fail"


def test_single_point_space_is_trivially_compatible():
    point = REG["point"]
    v = compat_check_2pt(point, default_metric(point))
    assert v.ok and v.status == "pass"


def test_C_compat_witness_is_pinned():
    v = compat_check_2pt(REG["C"], default_metric(REG["C"]))
    assert v.witness == {"p": "1/2", "x": "0", "y": "1", "z": "0", "lhs": "1", "rhs": "1/2"}


def test_extended_grid_passes_compat():
    rinf = REG["rinf-grid"]
    v = compat_check_2pt(rinf, extended_abs_metric(rinf), budget=250, rng=random.Random(1))
    assert v.ok
    v4 = compat_check_4pt(rinf, extended_abs_metric(rinf), budget=250, rng=random.Random(1))
    assert v4.ok


def test_two_point_and_four_point_agree_on_builtins():
    rng = random.Random(4)
    for sid, space in sorted(REG.items()):
        v = equiv_check(space, default_metric(space), budget=150, rng=rng)
        assert v.ok, (sid, v.witness)


def test_equiv_on_random_discrete_spaces():
    rng = random.Random(5)
    for k in range(20):
        space = random_finite_discrete_space(rng, f"rand{k}")
        metric = table_metric(space, random_discrete_metric(rng, space.carrier.labels))
        v = equiv_check(space, metric, budget=100, rng=rng)
        assert v.ok, (k, v.witness)


# ---------------------------------------------------------------------------
# exact transport


def test_wasserstein_simple_pinned_value():
    P = dirac(UNIT.element(0))
    Q = unit_measure((0, F(1, 2)), (1, F(1, 2)))
    res = wasserstein(P, Q, UMETRIC)
    assert res.cost == ExtValue(F(1, 2))
    assert res.method == "lp"
    assert res.plan.marginals_ok()
    brute = brute_force_wasserstein(P, Q, UMETRIC)
    assert brute.cost == res.cost
    assert brute.method == "brute"


def test_wasserstein_zero_iff_equal():
    rng = random.Random(6)
    for _ in range(40):
        P = random_measure(rng, UNIT)
        Q = random_measure(rng, UNIT)
        res = wasserstein(P, Q, UMETRIC)
        assert (res.cost == ZERO) == (P == Q)
        assert wasserstein(P, P, UMETRIC).cost == ZERO


def test_wasserstein_symmetry():
    rng = random.Random(7)
    for _ in range(40):
        P = random_measure(rng, UNIT)
        Q = random_measure(rng, UNIT)
        assert wasserstein(P, Q, UMETRIC).cost == wasserstein(Q, P, UMETRIC).cost


def test_wasserstein_triangle_inequality():
    rng = random.Random(8)
    for _ in range(25):
        P, Q, R = (random_measure(rng, UNIT) for _ in range(3))
        pq = wasserstein(P, Q, UMETRIC).cost
        qr = wasserstein(Q, R, UMETRIC).cost
        pr = wasserstein(P, R, UMETRIC).cost
        assert pr <= pq + qr


def test_wasserstein_on_diracs_is_the_ground_metric():
    rng = random.Random(9)
    for sid in ("unit_interval", "box2", "vee", "rinf-grid"):
        space = REG[sid]
        metric = default_metric(space)
        for _ in range(20):
            x, y = space.sample_element(rng), space.sample_element(rng)
            assert wasserstein(dirac(x), dirac(y), metric).cost == metric(x, y)


def test_lp_matches_brute_force_everywhere():
    rng = random.Random(10)
    spaces = ["unit_interval", "box2", "simplex3", "chain-max", "vee", "GxD"]
    for _ in range(120):
        space = REG[spaces[rng.randrange(len(spaces))]]
        metric = default_metric(space)
        P = random_measure(rng, space, 4)
        Q = random_measure(rng, space, 4)
        lp = wasserstein(P, Q, metric)
        bf = brute_force_wasserstein(P, Q, metric)
        assert lp.cost == bf.cost, (space.id, P, Q)
        assert lp.plan.marginals_ok() and bf.plan.marginals_ok()
        assert lp.plan.cost(metric) == lp.cost
        assert bf.plan.cost(metric) == bf.cost


def test_infinite_distance_returns_independent_coupling():
    rinf = REG["rinf-grid"]
    metric = extended_abs_metric(rinf)
    P = FinMeasure.from_pairs(
        rinf.id, [(rinf.element(INF), F(1, 2)), (rinf.element(F(0)), F(1, 2))]
    )
    Q = dirac(rinf.element(F(1)))
    for solver in (wasserstein, brute_force_wasserstein):
        res = solver(P, Q, metric)
        assert res.cost.is_inf
        assert res.plan.marginals_ok()
        # independent coupling: joint mass is the product of marginals
        for e, w in res.plan.joint.atoms:
            xw = P.mass(rinf.element(e.payload[0]))
            yw = Q.mass(rinf.element(e.payload[1]))
            assert w == xw * yw


def test_infinite_points_fine_when_matched():
    rinf = REG["rinf-grid"]
    metric = extended_abs_metric(rinf)
    P = FinMeasure.from_pairs(
        rinf.id, [(rinf.element(INF), F(1, 4)), (rinf.element(F(0)), F(3, 4))]
    )
    Q = FinMeasure.from_pairs(
        rinf.id, [(rinf.element(INF), F(1, 4)), (rinf.element(F(2)), F(3, 4))]
    )
    res = wasserstein(P, Q, metric)
    assert res.cost == ExtValue(F(3, 2))
    assert brute_force_wasserstein(P, Q, metric).cost == res.cost


def test_marginals_are_exactly_the_inputs():
    rng = random.Random(11)
    for _ in range(40):
        P = random_measure(rng, UNIT, 4)
        Q = random_measure(rng, UNIT, 4)
        plan = wasserstein(P, Q, UMETRIC).plan
        assert plan.left == P and plan.right == Q
        assert plan.marginal("left") == P
        assert plan.marginal("right") == Q


def test_degenerate_equal_masses():
    # equal cumulative masses force degenerate pivots in the simplex
    P = unit_measure((0, F(1, 3)), (F(1, 2), F(1, 3)), (1, F(1, 3)))
    Q = unit_measure((F(1, 4), F(1, 3)), (F(3, 4), F(1, 3)), (F(1, 2), F(1, 3)))
    res = wasserstein(P, Q, UMETRIC)
    assert res.cost == brute_force_wasserstein(P, Q, UMETRIC).cost
    assert res.plan.marginals_ok()


def test_brute_force_support_cap():
    P = unit_measure((0, F(1, 5)), (F(1, 4), F(1, 5)), (F(1, 2), F(1, 5)),
                     (F(3, 4), F(1, 5)), (1, F(1, 5)))
    with pytest.raises(ValueError):
        brute_force_wasserstein(P, P, UMETRIC)


def test_wasserstein_requires_same_space():
    P = dirac(UNIT.element(0))
    Q = dirac(REG["box2"].element((0, 0)))
    with pytest.raises(ValueError):
        wasserstein(P, Q, UMETRIC)
