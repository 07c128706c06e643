import random
from fractions import Fraction as F

import pytest

from girycheck.extvalue import INF, ExtValue
from girycheck.measures import (
    FinMeasure,
    MetaMeasure,
    convex_combine_measures,
    dirac,
    dirac_meta,
    expectation_functional,
    map_inner,
    measure_eval,
    mix_meta,
    mu,
    parse_measure,
    pushforward,
    to_text,
)
from girycheck.sampling import random_measure, random_meta, random_tower
from girycheck.spaces import (
    RINF,
    AffineMap,
    builtin_spaces,
    char_map,
    combine,
    enumerate_ideals,
    ext_element,
)

REG = builtin_spaces()
UNIT = REG["unit_interval"]
CHAIN = REG["chain-max"]
COORD = AffineMap(UNIT, RINF, lambda e: ext_element(e.payload), name="coord")


def unit_measure(*pairs):
    return FinMeasure.from_pairs(UNIT.id, [(UNIT.element(F(x)), F(w)) for x, w in pairs])


# ---------------------------------------------------------------------------
# construction invariants


def test_from_pairs_sorts_merges_and_drops_zeros():
    P = FinMeasure.from_pairs(
        UNIT.id,
        [
            (UNIT.element(F(3, 4)), F(1, 4)),
            (UNIT.element(F(1, 4)), F(1, 2)),
            (UNIT.element(F(3, 4)), F(1, 4)),
            (UNIT.element(F(1, 2)), F(0)),
        ],
    )
    assert [(e.payload, w) for e, w in P.atoms] == [(F(1, 4), F(1, 2)), (F(3, 4), F(1, 2))]


def test_masses_must_sum_to_one():
    with pytest.raises(ValueError):
        FinMeasure.from_pairs(UNIT.id, [(UNIT.element(0), F(1, 2))])
    with pytest.raises(ValueError):
        FinMeasure.from_pairs(UNIT.id, [])
    with pytest.raises(ValueError):
        FinMeasure.from_pairs(
            UNIT.id, [(UNIT.element(0), F(3, 2)), (UNIT.element(1), F(-1, 2))]
        )


def test_mass_lookup_and_support():
    P = unit_measure((0, F(1, 3)), (1, F(2, 3)))
    assert P.mass(UNIT.element(0)) == F(1, 3)
    assert P.mass(UNIT.element(F(1, 2))) == 0
    assert P.support() == (UNIT.element(0), UNIT.element(1))


def test_dirac():
    d = dirac(UNIT.element(F(1, 3)))
    assert d.atoms == ((UNIT.element(F(1, 3)), F(1)),)


def test_measure_equality_is_canonical():
    P = unit_measure((0, F(1, 2)), (1, F(1, 2)))
    Q = unit_measure((1, F(1, 2)), (0, F(1, 4)), (0, F(1, 4)))
    assert P == Q
    assert hash(P) == hash(Q)


# ---------------------------------------------------------------------------
# functor and monad structure


def test_pushforward_merges_collisions():
    P = unit_measure((0, F(1, 4)), (F(1, 2), F(1, 4)), (1, F(1, 2)))
    flat = AffineMap(UNIT, UNIT, lambda e: F(0) if e.payload < 1 else F(1), name="step")
    got = pushforward(flat, P)
    assert got == unit_measure((0, F(1, 2)), (1, F(1, 2)))


def test_pushforward_with_plain_callable_infers_space():
    P = unit_measure((0, F(1, 2)), (1, F(1, 2)))
    got = pushforward(lambda e: CHAIN.element("a" if e.payload == 0 else "e"), P)
    assert got.space_id == CHAIN.id
    assert got.mass(CHAIN.element("e")) == F(1, 2)


def test_functoriality_on_random_measures():
    rng = random.Random(11)
    half = AffineMap(UNIT, UNIT, lambda e: e.payload / 2, name="half")
    shift = AffineMap(UNIT, UNIT, lambda e: e.payload / 2 + F(1, 2), name="shift")
    ident = AffineMap(UNIT, UNIT, lambda e: e, name="id")
    for _ in range(50):
        P = random_measure(rng, UNIT)
        assert pushforward(ident, P) == P
        assert pushforward(shift, pushforward(half, P)) == pushforward(
            AffineMap(UNIT, UNIT, lambda e: shift(half(e)), name="comp"), P
        )


def test_mu_worked_example():
    # flattening {1/2 at point mass on 0, 1/2 at the fair coin on {0,1}}
    inner0 = dirac(UNIT.element(0))
    coin = unit_measure((0, F(1, 2)), (1, F(1, 2)))
    Q = MetaMeasure.from_pairs(UNIT.id, [(inner0, F(1, 2)), (coin, F(1, 2))])
    assert mu(Q) == unit_measure((0, F(3, 4)), (1, F(1, 4)))


def test_monad_left_unit():
    rng = random.Random(5)
    for _ in range(40):
        P = random_measure(rng, UNIT)
        assert mu(dirac_meta(P)) == P


def test_monad_right_unit():
    rng = random.Random(6)
    for _ in range(40):
        P = random_measure(rng, UNIT)
        lifted = MetaMeasure.from_pairs(
            UNIT.id, [(dirac(x), w) for x, w in P.atoms]
        )
        assert mu(lifted) == P


def test_monad_associativity_small_tower():
    rng = random.Random(7)
    for _ in range(40):
        ws, metas = random_tower(rng, UNIT)
        flat_outer = mu(mix_meta(ws, metas))
        flat_inner = convex_combine_measures(ws, [mu(q) for q in metas])
        assert flat_outer == flat_inner


def test_naturality_of_mu():
    # G f after mu equals mu after G(G f)
    rng = random.Random(8)
    half = AffineMap(UNIT, UNIT, lambda e: e.payload / 2, name="half")
    for _ in range(40):
        Q = random_meta(rng, UNIT)
        assert pushforward(half, mu(Q)) == mu(map_inner(half, Q))


def test_convex_combine_measures_matches_manual_mixture():
    P = unit_measure((0, F(1, 2)), (1, F(1, 2)))
    R = unit_measure((F(1, 2), 1))
    mix = convex_combine_measures((F(1, 3), F(2, 3)), (P, R))
    assert mix == unit_measure((0, F(1, 6)), (F(1, 2), F(2, 3)), (1, F(1, 6)))


def test_mix_meta_requires_matching_space():
    Q1 = dirac_meta(unit_measure((0, 1)))
    Q2 = dirac_meta(dirac(CHAIN.element("a")))
    with pytest.raises(ValueError):
        mix_meta((F(1, 2), F(1, 2)), (Q1, Q2))


# ---------------------------------------------------------------------------
# evaluation and expectations


def test_measure_eval():
    P = unit_measure((0, F(1, 4)), (F(1, 2), F(1, 4)), (1, F(1, 2)))
    members = {UNIT.element(0), UNIT.element(1)}
    assert measure_eval(P, members) == F(3, 4)
    assert measure_eval(P, set()) == 0


def test_expectation_functional_finite():
    P = unit_measure((0, F(1, 4)), (1, F(3, 4)))
    assert expectation_functional(P, COORD) == ExtValue(F(3, 4))


def test_expectation_functional_absorbs_infinity():
    nmin = REG["N-min"]
    ideals = enumerate_ideals(nmin)
    chi = char_map(nmin, ideals[0])  # {0}
    P = FinMeasure.from_pairs(
        nmin.id, [(nmin.element(0), F(1, 8)), (nmin.element(5), F(7, 8))]
    )
    assert expectation_functional(P, chi).is_inf
    Q = dirac(nmin.element(5))
    assert expectation_functional(Q, chi) == ExtValue(0)


def test_expectation_is_affine_in_the_measure():
    rng = random.Random(9)
    for _ in range(30):
        P = random_measure(rng, UNIT)
        Q = random_measure(rng, UNIT)
        mixed = convex_combine_measures((F(1, 3), F(2, 3)), (P, Q))
        assert (
            expectation_functional(mixed, COORD)
            == F(1, 3) * expectation_functional(P, COORD)
            + F(2, 3) * expectation_functional(Q, COORD)
        )


def test_barycenter_of_unit_interval_measure_matches_expectation():
    rng = random.Random(10)
    for _ in range(30):
        P = random_measure(rng, UNIT)
        ws = [w for _, w in P.atoms]
        xs = [x for x, _ in P.atoms]
        bary = combine(UNIT, ws, xs)
        assert ExtValue(bary.payload) == expectation_functional(P, COORD)


# ---------------------------------------------------------------------------
# text form


def test_to_text_format():
    P = unit_measure((F(1, 2), F(1, 3)), (0, F(2, 3)))
    assert to_text(P, UNIT) == "measure on unit_interval: 0:2/3, 1/2:1/3"


def test_parse_round_trip_across_spaces():
    rng = random.Random(12)
    for sid in ("unit_interval", "box2", "simplex3", "rinf-grid", "chain-max", "GxD", "vee"):
        space = REG[sid]
        for _ in range(20):
            P = random_measure(rng, space)
            assert parse_measure(to_text(P, space), space) == P


def test_parse_measure_rejects_garbage():
    with pytest.raises(ValueError):
        parse_measure("measure on unit_interval: 0;1", UNIT)
    with pytest.raises(ValueError):
        parse_measure("measure on box2: 0:1", UNIT)
    with pytest.raises(ValueError):
        parse_measure("measure on unit_interval: 0:1/2", UNIT)
    with pytest.raises(ValueError):
        parse_measure("not a measure", UNIT)


def test_parse_measure_handles_infinite_points():
    rinf = REG["rinf-grid"]
    P = FinMeasure.from_pairs(
        rinf.id, [(rinf.element(INF), F(1, 2)), (rinf.element(F(2)), F(1, 2))]
    )
    text = to_text(P, rinf)
    assert "inf" in text
    assert parse_measure(text, rinf) == P
