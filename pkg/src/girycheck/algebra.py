"""Expectation operators on convex spaces.

build_algebra routes on the carrier: barycenters where the metric is
compatible with the convex structure, order extremes on totally ordered
discrete spaces, componentwise operators on products, and branch-resolving
operators on glued spaces.  Spaces that admit no operator are rejected
with explicit witnesses rather than errors; the rejection is as much a
result as a constructed operator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .extvalue import ext_sum
from .measures import (
    FinMeasure,
    dirac,
    expectation_functional,
    mu,
    support,
    to_text,
)
from .metric_ot import ExtMetric, compat_check_2pt, default_metric
from .sampling import random_measure, random_meta, random_weights
from .spaces import (
    P_GRID,
    AffineMap,
    Box,
    Branched,
    ConvexSpaceSpec,
    Element,
    ExtendedLine,
    FiniteDiscrete,
    Interval,
    Product,
    RINF,
    Simplex,
    char_map,
    combine,
    combine2,
    compose,
    coseparates,
    discrete_poset,
    enumerate_ideals,
    ext_element,
    as_ext,
    projection,
)
from .verdicts import Verdict, failed, passed

from .measures import pushforward


@dataclass(frozen=True)
class AlgebraMap:
    """A candidate expectation operator: measures in, points out."""

    space: ConvexSpaceSpec
    rule: object
    provenance: str  # geometric-barycenter / discrete-min / discrete-max /
    #                  mixed-product / mixed-semidirect / user-supplied

    @property
    def space_id(self) -> str:
        return self.space.id

    def __call__(self, P: FinMeasure) -> Element:
        if P.space_id != self.space.id:
            raise ValueError(f"measure on {P.space_id} fed to algebra on {self.space.id}")
        out = self.rule(P)
        if not isinstance(out, Element) or out.space_id != self.space.id:
            raise ValueError(f"algebra rule returned {out!r}")
        return out


@dataclass(frozen=True)
class Rejection:
    """A space with no expectation operator, and why."""

    space_id: str
    reasons: tuple  # ((condition name, Verdict), ...)

    def reason_names(self):
        return tuple(name for name, _ in self.reasons)

    def to_json(self) -> dict:
        return {
            "space": self.space_id,
            "rejected": True,
            "reasons": {name: v.to_json() for name, v in self.reasons},
        }


@dataclass(frozen=True)
class AlgebraReport:
    space_id: str
    provenance: str
    unit_law: Verdict
    mult_law: Verdict
    coseparator_law: Verdict
    support_condition: Optional[Verdict]
    compat: Optional[Verdict]

    @property
    def ok(self) -> bool:
        parts = [self.unit_law, self.mult_law, self.coseparator_law]
        parts += [v for v in (self.support_condition, self.compat) if v is not None]
        return all(v.ok for v in parts)

    def to_json(self) -> dict:
        out = {
            "space": self.space_id,
            "provenance": self.provenance,
            "unit_law": self.unit_law.to_json(),
            "mult_law": self.mult_law.to_json(),
            "coseparator_law": self.coseparator_law.to_json(),
            "overall": "pass" if self.ok else "fail",
        }
        if self.support_condition is not None:
            out["support_condition"] = self.support_condition.to_json()
        if self.compat is not None:
            out["compat"] = self.compat.to_json()
        return out


def user_algebra(space: ConvexSpaceSpec, rule, provenance="user-supplied") -> AlgebraMap:
    return AlgebraMap(space, rule, provenance)


# ---------------------------------------------------------------------------
# construction


def build_algebra(space: ConvexSpaceSpec, metric: ExtMetric = None, budget: int = 500, rng=None):
    """Expectation operator for the space, or a Rejection with witnesses."""
    metric = metric if metric is not None else default_metric(space)
    carrier = space.carrier

    if isinstance(carrier, FiniteDiscrete):
        poset = discrete_poset(space)
        if not poset.is_total:
            reasons = [("poset-not-total", failed(poset.witness))]
            comp = compat_check_2pt(space, metric, budget, rng)
            if not comp.ok:
                reasons.append(("compat", comp))
            return Rejection(space.id, tuple(reasons))
        if carrier.rule == "max":
            return AlgebraMap(space, _extreme_rule(space, maximize=True), "discrete-max")
        if carrier.rule == "min":
            return AlgebraMap(space, _extreme_rule(space, maximize=False), "discrete-min")
        # a totally ordered collapse rule still folds consistently
        return AlgebraMap(space, _fold_rule(space), "discrete-fold")

    if isinstance(carrier, (Interval, Box, Simplex)):
        comp = compat_check_2pt(space, metric, budget, rng)
        if not comp.ok:
            return Rejection(space.id, (("compat", comp),))
        return AlgebraMap(space, _barycenter_rule(space), "geometric-barycenter")

    if isinstance(carrier, ExtendedLine):
        comp = compat_check_2pt(space, metric, budget, rng)
        if not comp.ok:
            return Rejection(space.id, (("compat", comp),))
        return AlgebraMap(space, _absorbing_barycenter_rule(space), "geometric-barycenter")

    if isinstance(carrier, Product):
        subs = []
        for comp_space in carrier.components:
            sub = build_algebra(comp_space, None, budget, rng)
            if isinstance(sub, Rejection):
                reasons = tuple((f"{comp_space.id}:{name}", v) for name, v in sub.reasons)
                return Rejection(space.id, reasons)
            subs.append(sub)
        return AlgebraMap(space, _product_rule(space, tuple(subs)), "mixed-product")

    if isinstance(carrier, Branched):
        poset = discrete_poset(carrier.branch_space)
        if not poset.is_total:
            return Rejection(space.id, (("branch-poset-not-total", failed(poset.witness)),))
        arms = {}
        for label, comp_space in carrier.components:
            sub = build_algebra(comp_space, None, budget, rng)
            if isinstance(sub, Rejection):
                reasons = tuple((f"{comp_space.id}:{name}", v) for name, v in sub.reasons)
                return Rejection(space.id, reasons)
            arms[label] = sub
        return AlgebraMap(space, _branched_rule(space, arms), "mixed-semidirect")

    raise ValueError(f"no construction for carrier {type(carrier).__name__}")


def _barycenter_rule(space):
    def rule(P):
        first = P.atoms[0][0].payload
        if isinstance(first, tuple):
            dims = range(len(first))
            return space.element(tuple(sum(w * e.payload[k] for e, w in P.atoms) for k in dims))
        return space.element(sum(w * e.payload for e, w in P.atoms))

    return rule


def _absorbing_barycenter_rule(space):
    def rule(P):
        return space.element(ext_sum(w * e.payload for e, w in P.atoms))

    return rule


def _extreme_rule(space, maximize: bool):
    index = space.carrier._index

    def rule(P):
        best = None
        for e, _ in P.atoms:
            k = index(e.payload)
            if best is None or (k > best[0] if maximize else k < best[0]):
                best = (k, e)
        return best[1]

    return rule


def _fold_rule(space):
    def rule(P):
        xs = support(P)
        return combine(space, [Fraction(1, len(xs))] * len(xs), xs)

    return rule


def _product_rule(space, subs):
    comps = space.carrier.components

    def rule(P):
        payload = []
        for k, (comp, sub) in enumerate(zip(comps, subs)):
            Pk = pushforward(lambda e, k=k, comp=comp: Element(comp.id, e.payload[k]), P)
            payload.append(sub(Pk).payload)
        return space.element(tuple(payload))

    return rule


def _branched_rule(space, arms):
    carrier = space.carrier
    bspace = carrier.branch_space

    def rule(P):
        labels = []
        for e, _ in P.atoms:
            if e.payload[0] not in labels:
                labels.append(e.payload[0])
        win = labels[0]
        for lab in labels[1:]:
            win = combine2(
                bspace, Fraction(1, 2), bspace.element(win), bspace.element(lab)
            ).payload
        comp = carrier._component(win)
        pairs = []
        for e, w in P.atoms:
            lab, a = e.payload
            if lab != win:
                a = carrier._transition_target(lab, win)
            pairs.append((Element(comp.id, comp.carrier.normalize(a)), w))
        inner = arms[win](FinMeasure.from_pairs(comp.id, pairs))
        return space.element((win, inner.payload))

    return rule


# ---------------------------------------------------------------------------
# the two algebra laws


def verify_unit_law(h: AlgebraMap, budget: int = 200, rng=None) -> Verdict:
    """h(dirac(a)) = a, exhaustively on finite carriers."""
    space = h.space
    elems = space.enumerate_elements()
    exhaustive = elems is not None
    if not exhaustive:
        rng = rng or random.Random(11)
        elems = space.landmark_elements()
        elems += [space.sample_element(rng) for _ in range(budget)]
    for a in elems:
        if h(dirac(a)) != a:
            return failed({"a": space.point_str(a), "got": space.point_str(h(dirac(a)))})
    return passed(exhaustive, note="" if exhaustive else f"landmarks + {budget} samples")


def _meta_text(Q, space) -> str:
    return "; ".join(f"{q}: {to_text(P, space)}" for P, q in Q.atoms)


def verify_mult_law(h: AlgebraMap, budget: int = 300, rng=None) -> Verdict:
    """h after flattening equals h after applying h inside, on random
    two-level measures."""
    space = h.space
    rng = rng or random.Random(13)
    for _ in range(budget):
        Q = random_meta(rng, space, max_outer=5, max_atoms=5)
        left = h(mu(Q))
        inner_applied = FinMeasure.from_pairs(
            space.id, [(h(P), q) for P, q in Q.atoms]
        )
        right = h(inner_applied)
        if left != right:
            return failed(
                {
                    "Q": _meta_text(Q, space),
                    "flatten_then_h": space.point_str(left),
                    "h_inside_then_h": space.point_str(right),
                }
            )
    return passed(exhaustive=False, note=f"{budget} random meta-measures")


def verify_coseparator_property(h: AlgebraMap, maps, budget: int = 200, rng=None) -> Verdict:
    """m(h(P)) = E_P(m) for every test map m."""
    space = h.space
    rng = rng or random.Random(17)
    for _ in range(budget):
        P = random_measure(rng, space, max_atoms=4)
        a = h(P)
        for m in maps:
            lhs = as_ext(m(a))
            rhs = expectation_functional(P, m)
            if lhs != rhs:
                return failed(
                    {
                        "P": to_text(P, space),
                        "map": m.name,
                        "m_of_h": str(lhs),
                        "expectation": str(rhs),
                    }
                )
    return passed(exhaustive=False, note=f"{budget} random measures x {len(maps)} maps")


def support_condition_check(h: AlgebraMap, budget: int = 300, rng=None) -> Optional[Verdict]:
    """h(P) must land in Supp(P) along every discrete direction.

    Geometric carriers have no discrete direction; they return None.
    """
    space = h.space
    carrier = space.carrier
    rng = rng or random.Random(19)

    if isinstance(carrier, FiniteDiscrete):
        elems = space.enumerate_elements()
        # all two-point measures over the p-grid, then random larger ones
        for i, x in enumerate(elems):
            for y in elems[i + 1 :]:
                for p in P_GRID:
                    P = FinMeasure.from_pairs(space.id, [(x, p), (y, 1 - p)])
                    out = h(P)
                    if out not in support(P):
                        return failed(
                            {"P": to_text(P, space), "h": space.point_str(out)}
                        )
        for _ in range(budget):
            P = random_measure(rng, space, max_atoms=4)
            out = h(P)
            if out not in support(P):
                return failed({"P": to_text(P, space), "h": space.point_str(out)})
        return passed(exhaustive=False, note="all grid pairs + random measures")

    if isinstance(carrier, ExtendedLine):
        # the absorbing point is the only discrete direction here
        hits = 0
        for _ in range(budget):
            P = random_measure(rng, space, max_atoms=4)
            if any(e.payload.is_inf for e, _ in P.atoms):
                hits += 1
                if not h(P).payload.is_inf:
                    return failed({"P": to_text(P, space), "h": space.point_str(h(P))})
        return passed(exhaustive=False, note=f"{hits} absorbing-support cases")

    if isinstance(carrier, Product):
        discrete_axes = [
            k
            for k, comp in enumerate(carrier.components)
            if isinstance(comp.carrier, FiniteDiscrete)
        ]
        if not discrete_axes:
            return None
        for _ in range(budget):
            P = random_measure(rng, space, max_atoms=4)
            out = h(P)
            for k in discrete_axes:
                seen = {e.payload[k] for e, _ in P.atoms}
                if out.payload[k] not in seen:
                    return failed(
                        {"P": to_text(P, space), "axis": str(k), "h": space.point_str(out)}
                    )
        return passed(exhaustive=False, note=f"{budget} random measures, discrete axes")

    if isinstance(carrier, Branched):
        for _ in range(budget):
            P = random_measure(rng, space, max_atoms=4)
            out = h(P)
            labels = {e.payload[0] for e, _ in P.atoms}
            # the glue point is canonical on its own branch; accept either side
            ok = out.payload[0] in labels or any(
                g.ident is not None
                and out.payload == (g.src, g.ident)
                and g.dst in labels
                for g in carrier.gluings
            )
            if not ok:
                return failed({"P": to_text(P, space), "h": space.point_str(out)})
        return passed(exhaustive=False, note=f"{budget} random measures, branch labels")

    return None


def induced_structure_check(h: AlgebraMap, budget: int = 200, rng=None) -> Verdict:
    """The combination induced by h agrees with the declared combine rule."""
    space = h.space
    rng = rng or random.Random(23)
    for _ in range(budget):
        k = rng.randint(1, 4)
        xs = [space.sample_element(rng) for _ in range(k)]
        ws = random_weights(rng, k)
        if sum(w > 0 for w in ws) == 0:
            continue
        native = combine(space, ws, xs)
        via_h = h(FinMeasure.from_pairs(space.id, zip(xs, ws)))
        if native != via_h:
            return failed(
                {
                    "points": ", ".join(space.point_str(x) for x in xs),
                    "weights": ", ".join(str(w) for w in ws),
                    "combine": space.point_str(native),
                    "algebra": space.point_str(via_h),
                }
            )
    return passed(exhaustive=False, note=f"{budget} random families")


# ---------------------------------------------------------------------------
# coseparating test maps per space


def _interval_maps(space):
    lo, hi = space.carrier.lo, space.carrier.hi
    ident = AffineMap(space, RINF, lambda e: ext_element(e.payload), name="coord")
    flip = AffineMap(
        space, RINF, lambda e: ext_element(lo + hi - e.payload), name="reflect"
    )
    return [ident, flip]


def _coordinate_maps(space, dims):
    return [
        AffineMap(
            space, RINF, lambda e, k=k: ext_element(e.payload[k]), name=f"coord{k}"
        )
        for k in range(dims)
    ]


def _height_maps(space):
    carrier = space.carrier
    out = []
    for g in carrier.gluings:
        if g.ident is None:
            continue

        def fn(e, g=g):
            lab, a = e.payload
            if lab == g.dst:
                return ext_element(a - g.target)
            return ext_element(0)

        out.append(AffineMap(space, RINF, fn, name=f"height[{g.dst}]"))
    return out


def coseparator_maps(space: ConvexSpaceSpec):
    """Affine test maps into the extended line for the given space."""
    carrier = space.carrier
    if isinstance(carrier, Interval):
        return _interval_maps(space)
    if isinstance(carrier, Box):
        return _coordinate_maps(space, len(carrier.bounds))
    if isinstance(carrier, Simplex):
        return _coordinate_maps(space, carrier.n)
    if isinstance(carrier, ExtendedLine):
        ident = AffineMap(space, RINF, lambda e: ext_element(e.payload), name="coord")
        inf_char = AffineMap(
            space,
            RINF,
            lambda e: ext_element(e.payload) if e.payload.is_inf else ext_element(0),
            name="chi[inf]",
        )
        return [ident, inf_char]
    if isinstance(carrier, FiniteDiscrete):
        return [char_map(space, ideal) for ideal in enumerate_ideals(space)]
    if isinstance(carrier, Product):
        maps = []
        for k, comp in enumerate(carrier.components):
            proj = projection(space, k)
            maps += [compose(m, proj) for m in coseparator_maps(comp)]
        return maps
    if isinstance(carrier, Branched):
        return _height_maps(space)
    raise ValueError(f"no test maps for carrier {type(carrier).__name__}")


# ---------------------------------------------------------------------------
# full per-space verification


def full_report(space: ConvexSpaceSpec, metric: ExtMetric = None, budget: int = 300, rng=None):
    """Build the algebra and run every applicable law; Rejection passes through."""
    metric = metric if metric is not None else default_metric(space)
    rng = rng or random.Random(29)
    alg = build_algebra(space, metric, budget, random.Random(rng.randrange(2**30)))
    if isinstance(alg, Rejection):
        return alg
    compat = None
    if isinstance(space.carrier, (Interval, Box, Simplex, ExtendedLine)):
        compat = compat_check_2pt(space, metric, budget, random.Random(rng.randrange(2**30)))
    unit = verify_unit_law(alg, 200, random.Random(rng.randrange(2**30)))
    mult = verify_mult_law(alg, budget, random.Random(rng.randrange(2**30)))
    cosep = verify_coseparator_property(
        alg, coseparator_maps(space), 200, random.Random(rng.randrange(2**30))
    )
    supp = support_condition_check(alg, 200, random.Random(rng.randrange(2**30)))
    return AlgebraReport(space.id, alg.provenance, unit, mult, cosep, supp, compat)


# ---------------------------------------------------------------------------
# the three-point counterexample, rebuilt from the general machinery


def counterexample_C(space: ConvexSpaceSpec = None) -> dict:
    """Why the three-point collapse space admits no expectation operator."""
    if space is None:
        from .registry import builtin_registry

        space = builtin_registry().space("C")
    metric = default_metric(space)

    ideals = enumerate_ideals(space)
    maps = [char_map(space, ideal) for ideal in ideals]
    cosep = coseparates(maps, space)
    compat = compat_check_2pt(space, metric)
    poset = discrete_poset(space)

    # the would-be operator: transport each measure through the combine rule
    def transported(P):
        xs = support(P)
        return combine(space, [w for _, w in P.atoms], xs)

    candidate = user_algebra(space, transported)
    supp = support_condition_check(candidate, budget=50, rng=random.Random(3))
    rejection = build_algebra(space, metric)

    return {
        "space": space.id,
        "ideals": [
            [space.point_str(e) for e in ideal.member_list()] for ideal in ideals
        ],
        "coseparation": cosep.to_json(),
        "compat": compat.to_json(),
        "support_condition": supp.to_json(),
        "poset": {
            "is_total": poset.is_total,
            "witness": dict(sorted(poset.witness.items())),
        },
        "rejection": rejection.to_json(),
    }
