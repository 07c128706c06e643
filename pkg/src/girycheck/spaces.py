"""Convex spaces over exact rationals.

A space is a carrier set together with an n-ary convex combination rule that
is exact over Fraction weights.  Carriers implemented here:

* rational intervals, boxes, probability simplices (geometric);
* extended lines [lo, hi] plus +inf with absorbing combinations;
* finite label sets with min / max / collapse-to-center rules (discrete);
* products (componentwise rule);
* two-or-more branches glued along affine transition maps (the losing
  branch of a combination is mapped through its gluing into the winning
  branch, weights unchanged).

Everything downstream (measures, transport, algebra checks) goes through
`combine` and the Element type defined here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .extvalue import INF, ExtValue, parse_ext
from .verdicts import Verdict, failed, passed

# Probability grid for affinity / compatibility / classification probes.
# The midpoint comes first so first-found witnesses use p = 1/2.
P_GRID = (
    Fraction(1, 2), Fraction(1, 3), Fraction(2, 3),
    Fraction(1, 8), Fraction(1, 4), Fraction(3, 8),
    Fraction(5, 8), Fraction(3, 4), Fraction(7, 8),
)


class SpaceKind(Enum):
    GEOMETRIC = "geometric"
    DISCRETE = "discrete"
    MIXED = "mixed"


@dataclass(frozen=True)
class Element:
    """A point of a named space.  Payload shape is carrier-specific."""

    space_id: str
    payload: object

    def __str__(self):
        return f"{self.space_id}:{_payload_str(self.payload)}"


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative rational weights summing to one."""

    weights: tuple

    def __post_init__(self):
        ws = tuple(Fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if not ws:
            raise ValueError("empty weight vector")
        if any(w < 0 for w in ws):
            raise ValueError(f"negative weight in {ws}")
        if sum(ws) != 1:
            raise ValueError(f"weights sum to {sum(ws)}, not 1")

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)


def _payload_str(p) -> str:
    if isinstance(p, ExtValue):
        return str(p)
    if isinstance(p, (Fraction, int)):
        return str(Fraction(p))
    if isinstance(p, str):
        return p
    if isinstance(p, tuple):
        return "(" + ",".join(_payload_str(c) for c in p) + ")"
    raise TypeError(f"unprintable payload {p!r}")


def payload_sort_key(p):
    """Total order on payloads of a common shape, for canonical listings."""
    if isinstance(p, ExtValue):
        return ("g", ()) if p.is_inf else ("f", p.value)
    if isinstance(p, (Fraction, int)):
        return ("f", Fraction(p))
    if isinstance(p, str):
        return ("s", p)
    if isinstance(p, tuple):
        return ("t", tuple(payload_sort_key(c) for c in p))
    raise TypeError(f"unsortable payload {p!r}")


# ---------------------------------------------------------------------------
# carriers


@dataclass(frozen=True)
class Interval:
    """[lo, hi] with the standard rational barycenter."""

    lo: Fraction
    hi: Fraction

    is_finite = False

    def normalize(self, p):
        return Fraction(p)

    def contains(self, p) -> bool:
        return isinstance(p, Fraction) and self.lo <= p <= self.hi

    def combine(self, ws, ps):
        return sum(w * p for w, p in zip(ws, ps))

    def sample(self, rng):
        return self.lo + (self.hi - self.lo) * Fraction(rng.randint(0, 64), 64)

    def landmarks(self):
        return [self.lo, self.hi, (self.lo + self.hi) / 2]

    def enumerate_points(self):
        return None

    def point_str(self, p):
        return str(p)

    def parse_point(self, s):
        return Fraction(s)


@dataclass(frozen=True)
class Box:
    """Product of rational intervals; payload is a coordinate tuple."""

    bounds: tuple  # ((lo, hi), ...)

    is_finite = False

    def normalize(self, p):
        if not isinstance(p, tuple) or len(p) != len(self.bounds):
            raise ValueError(f"expected {len(self.bounds)} coordinates, got {p!r}")
        return tuple(Fraction(c) for c in p)

    def contains(self, p) -> bool:
        return (
            isinstance(p, tuple)
            and len(p) == len(self.bounds)
            and all(lo <= c <= hi for c, (lo, hi) in zip(p, self.bounds))
        )

    def combine(self, ws, ps):
        dim = len(self.bounds)
        return tuple(sum(w * p[k] for w, p in zip(ws, ps)) for k in range(dim))

    def sample(self, rng):
        return tuple(
            lo + (hi - lo) * Fraction(rng.randint(0, 64), 64) for lo, hi in self.bounds
        )

    def landmarks(self):
        corners = list(itertools.product(*[(lo, hi) for lo, hi in self.bounds]))
        mid = tuple((lo + hi) / 2 for lo, hi in self.bounds)
        return corners + [mid]

    def enumerate_points(self):
        return None

    def point_str(self, p):
        return "(" + ",".join(str(c) for c in p) + ")"

    def parse_point(self, s):
        s = s.strip()
        if not (s.startswith("(") and s.endswith(")")):
            raise ValueError(f"expected (c1,...,cn), got {s!r}")
        return tuple(Fraction(part) for part in s[1:-1].split(","))


@dataclass(frozen=True)
class Simplex:
    """Probability vectors of a fixed length; payload is a tuple summing to 1."""

    n: int

    is_finite = False

    def normalize(self, p):
        if not isinstance(p, tuple) or len(p) != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {p!r}")
        return tuple(Fraction(c) for c in p)

    def contains(self, p) -> bool:
        return (
            isinstance(p, tuple)
            and len(p) == self.n
            and all(c >= 0 for c in p)
            and sum(p) == 1
        )

    def combine(self, ws, ps):
        return tuple(sum(w * p[k] for w, p in zip(ws, ps)) for k in range(self.n))

    def sample(self, rng):
        cuts = [Fraction(rng.randint(1, 9)) for _ in range(self.n)]
        total = sum(cuts)
        return tuple(c / total for c in cuts)

    def landmarks(self):
        verts = []
        for k in range(self.n):
            verts.append(tuple(Fraction(int(i == k)) for i in range(self.n)))
        verts.append(tuple(Fraction(1, self.n) for _ in range(self.n)))
        return verts

    def enumerate_points(self):
        return None

    def point_str(self, p):
        return "(" + ",".join(str(c) for c in p) + ")"

    def parse_point(self, s):
        s = s.strip()
        if not (s.startswith("(") and s.endswith(")")):
            raise ValueError(f"expected (c1,...,cn), got {s!r}")
        return tuple(Fraction(part) for part in s[1:-1].split(","))


@dataclass(frozen=True)
class ExtendedLine:
    """Rationals in [lo, hi] plus +inf; combinations absorb into +inf.

    lo/hi of None means unbounded on that side.  nonneg restricts to >= 0.
    The sampling grid is a quarter-step lattice; the carrier itself is every
    rational in range (rational barycenters must stay inside).
    """

    lo: Optional[Fraction]
    hi: Optional[Fraction]

    is_finite = False

    def normalize(self, p):
        if isinstance(p, ExtValue):
            return p
        return ExtValue(Fraction(p))

    def contains(self, p) -> bool:
        if not isinstance(p, ExtValue):
            return False
        if p.is_inf:
            return True
        if self.lo is not None and p.value < self.lo:
            return False
        if self.hi is not None and p.value > self.hi:
            return False
        return True

    def combine(self, ws, ps):
        if any(p.is_inf for p in ps):
            return INF
        return ExtValue(sum(w * p.value for w, p in zip(ws, ps)))

    def _grid(self):
        lo = self.lo if self.lo is not None else Fraction(-8)
        hi = self.hi if self.hi is not None else Fraction(8)
        step = Fraction(1, 4)
        pts = []
        x = lo
        while x <= hi:
            pts.append(ExtValue(x))
            x += step
        return pts

    def sample(self, rng):
        if rng.randint(1, 6) == 1:
            return INF
        return rng.choice(self._grid())

    def landmarks(self):
        g = self._grid()
        return [g[0], g[-1], g[len(g) // 2], INF]

    def enumerate_points(self):
        return None

    def point_str(self, p):
        return str(p)

    def parse_point(self, s):
        return parse_ext(s)


@dataclass(frozen=True)
class FiniteDiscrete:
    """Finite label set with a p-independent combination rule.

    rule "min"/"max" takes the earlier/later label in declaration order;
    rule "collapse" sends every combination of distinct points to `center`.
    """

    labels: tuple
    rule: str
    center: object = None

    is_finite = True

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels")
        if self.rule not in ("min", "max", "collapse"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.rule == "collapse" and self.center not in self.labels:
            raise ValueError("collapse rule needs a center label")

    def _index(self, p):
        return self.labels.index(p)

    def normalize(self, p):
        if p in self.labels:
            return p
        raise ValueError(f"label {p!r} not in {self.labels}")

    def contains(self, p) -> bool:
        return p in self.labels

    def combine(self, ws, ps):
        distinct = []
        for p in ps:
            if p not in distinct:
                distinct.append(p)
        if len(distinct) == 1:
            return distinct[0]
        if self.rule == "min":
            return min(distinct, key=self._index)
        if self.rule == "max":
            return max(distinct, key=self._index)
        return self.center

    def sample(self, rng):
        return rng.choice(self.labels)

    def landmarks(self):
        return [self.labels[0], self.labels[-1]]

    def enumerate_points(self):
        return list(self.labels)

    def point_str(self, p):
        return str(p)

    def parse_point(self, s):
        s = s.strip()
        for lab in self.labels:
            if str(lab) == s:
                return lab
        raise ValueError(f"label {s!r} not in {self.labels}")


@dataclass(frozen=True)
class Product:
    """Componentwise combination over a tuple of spaces."""

    components: tuple  # of ConvexSpaceSpec

    @property
    def is_finite(self):
        return all(c.carrier.is_finite for c in self.components)

    def normalize(self, p):
        if not isinstance(p, tuple) or len(p) != len(self.components):
            raise ValueError(f"expected {len(self.components)} components, got {p!r}")
        return tuple(c.carrier.normalize(x) for c, x in zip(self.components, p))

    def contains(self, p) -> bool:
        return (
            isinstance(p, tuple)
            and len(p) == len(self.components)
            and all(c.carrier.contains(x) for c, x in zip(self.components, p))
        )

    def combine(self, ws, ps):
        out = []
        for k, comp in enumerate(self.components):
            out.append(comp.carrier.combine(ws, tuple(p[k] for p in ps)))
        return tuple(out)

    def sample(self, rng):
        return tuple(c.carrier.sample(rng) for c in self.components)

    def landmarks(self):
        per = [c.carrier.landmarks()[:2] for c in self.components]
        return [tuple(t) for t in itertools.product(*per)]

    def enumerate_points(self):
        if not self.is_finite:
            return None
        per = [c.carrier.enumerate_points() for c in self.components]
        return [tuple(t) for t in itertools.product(*per)]

    def point_str(self, p):
        parts = [c.carrier.point_str(x) for c, x in zip(self.components, p)]
        return "[" + "|".join(parts) + "]"

    def parse_point(self, s):
        s = s.strip()
        if not (s.startswith("[") and s.endswith("]")):
            raise ValueError(f"expected [c1|...|cn], got {s!r}")
        parts = _split_top(s[1:-1], "|")
        if len(parts) != len(self.components):
            raise ValueError(f"expected {len(self.components)} components in {s!r}")
        return tuple(
            c.carrier.parse_point(part) for c, part in zip(self.components, parts)
        )


def _split_top(s: str, sep: str):
    """Split on sep outside any bracket nesting."""
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


@dataclass(frozen=True)
class Gluing:
    """Constant transition: every point of branch `src` acts as `target`
    (a point of branch `dst`) inside combinations won by `dst`.  If `ident`
    is set, the src point `ident` and the dst point `target` are the same
    point of the glued space, canonically written on the src branch."""

    src: object
    dst: object
    target: object
    ident: object = None


@dataclass(frozen=True)
class Branched:
    """Branches indexed by a discrete space, glued along transition maps.

    payload = (branch_label, component_payload).  A combination first
    resolves the winning branch by the discrete rule on the labels present,
    then combines in that branch with unchanged weights, each losing point
    entering through its gluing target.
    """

    branch_space: object  # ConvexSpaceSpec with FiniteDiscrete carrier
    components: tuple  # ((label, ConvexSpaceSpec), ...)
    gluings: tuple  # of Gluing

    @property
    def is_finite(self):
        return all(c.carrier.is_finite for _, c in self.components)

    def _component(self, label):
        for lab, comp in self.components:
            if lab == label:
                return comp
        raise ValueError(f"no branch {label!r}")

    def _transition_target(self, src, dst):
        # constant gluings compose to the final constant; follow a path
        if src == dst:
            return None
        direct = {(g.src, g.dst): g.target for g in self.gluings}
        if (src, dst) in direct:
            return direct[(src, dst)]
        # breadth-first composition through intermediate branches
        seen, frontier = {src}, [(src, None)]
        while frontier:
            nxt = []
            for node, tgt in frontier:
                for (a, b), t in direct.items():
                    if a == node and b not in seen:
                        if b == dst:
                            return t
                        seen.add(b)
                        nxt.append((b, t))
            frontier = nxt
        raise ValueError(f"no gluing path {src!r} -> {dst!r}")

    def normalize(self, p):
        if not (isinstance(p, tuple) and len(p) == 2):
            raise ValueError(f"expected (branch, point), got {p!r}")
        label, inner = p
        comp = self._component(label)
        inner = comp.carrier.normalize(inner)
        for g in self.gluings:
            if g.ident is not None and label == g.dst and inner == g.target:
                return (g.src, self._component(g.src).carrier.normalize(g.ident))
        return (label, inner)

    def contains(self, p) -> bool:
        if not (isinstance(p, tuple) and len(p) == 2):
            return False
        label, inner = p
        try:
            comp = self._component(label)
        except ValueError:
            return False
        return comp.carrier.contains(inner)

    def combine(self, ws, ps):
        labels = []
        for b, _ in ps:
            if b not in labels:
                labels.append(b)
        if len(labels) == 1:
            win = labels[0]
        else:
            win = self.branch_space.carrier.combine(ws, tuple(b for b, _ in ps))
        comp = self._component(win)
        moved = tuple(
            x if b == win else self._transition_target(b, win) for b, x in ps
        )
        return self.normalize((win, comp.carrier.combine(ws, moved)))

    def sample(self, rng):
        label, comp = self.components[rng.randrange(len(self.components))]
        return self.normalize((label, comp.carrier.sample(rng)))

    def landmarks(self):
        out = []
        for label, comp in self.components:
            for p in comp.carrier.landmarks():
                out.append(self.normalize((label, p)))
        seen, uniq = set(), []
        for p in out:
            if p not in seen:
                seen.add(p)
                uniq.append(p)
        return uniq

    def enumerate_points(self):
        if not self.is_finite:
            return None
        out, seen = [], set()
        for label, comp in self.components:
            for p in comp.carrier.enumerate_points():
                q = self.normalize((label, p))
                if q not in seen:
                    seen.add(q)
                    out.append(q)
        return out

    def point_str(self, p):
        label, inner = p
        return f"{label}@{self._component(label).carrier.point_str(inner)}"

    def parse_point(self, s):
        s = s.strip()
        if "@" not in s:
            raise ValueError(f"expected branch@point, got {s!r}")
        label, _, rest = s.partition("@")
        comp = self._component(self.branch_space.carrier.parse_point(label))
        return self.normalize(
            (self.branch_space.carrier.parse_point(label), comp.carrier.parse_point(rest))
        )


# ---------------------------------------------------------------------------
# the space type and its operations


@dataclass(frozen=True)
class ConvexSpaceSpec:
    """A named carrier with a combination rule and a declared kind."""

    id: str
    kind: SpaceKind
    carrier: object
    expect_reject: bool = False

    @property
    def is_finite(self) -> bool:
        return self.carrier.is_finite

    def element(self, raw) -> Element:
        p = self.carrier.normalize(raw)
        if not self.carrier.contains(p):
            raise ValueError(f"{_payload_str(p)} is not a point of {self.id}")
        return Element(self.id, p)

    def enumerate_elements(self):
        pts = self.carrier.enumerate_points()
        if pts is None:
            return None
        return [Element(self.id, p) for p in pts]

    def sample_element(self, rng) -> Element:
        return Element(self.id, self.carrier.sample(rng))

    def landmark_elements(self):
        return [Element(self.id, p) for p in self.carrier.landmarks()]

    def point_str(self, e: Element) -> str:
        return self.carrier.point_str(e.payload)

    def parse_element(self, s: str) -> Element:
        return self.element(self.carrier.parse_point(s))


def combine(space: ConvexSpaceSpec, weights, elements) -> Element:
    """Convex combination of elements with the given weights.

    Zero-weight entries are dropped before the carrier rule runs.
    """
    ws = list(weights.weights if isinstance(weights, WeightVector) else map(Fraction, weights))
    xs = list(elements)
    if len(ws) != len(xs):
        raise ValueError("weights and elements differ in length")
    if not xs:
        raise ValueError("empty combination")
    for e in xs:
        if e.space_id != space.id:
            raise ValueError(f"element of {e.space_id} combined in {space.id}")
    if any(w < 0 for w in ws):
        raise ValueError("negative weight")
    if sum(ws) != 1:
        raise ValueError(f"weights sum to {sum(ws)}, not 1")
    kept = [(w, e) for w, e in zip(ws, xs) if w > 0]
    if not kept:
        raise ValueError("all weights zero")
    if len(kept) == 1:
        return kept[0][1]
    ws2 = tuple(w for w, _ in kept)
    ps2 = tuple(e.payload for _, e in kept)
    return Element(space.id, space.carrier.combine(ws2, ps2))


def combine2(space: ConvexSpaceSpec, p, x: Element, y: Element) -> Element:
    """Binary combination p*x + (1-p)*y."""
    p = Fraction(p)
    return combine(space, (p, 1 - p), (x, y))


# ---------------------------------------------------------------------------
# affine maps


@dataclass(frozen=True)
class AffineMap:
    """A map between spaces expected to commute with combinations."""

    domain: ConvexSpaceSpec
    codomain: ConvexSpaceSpec
    fn: Callable
    name: str = "map"

    def __call__(self, e: Element) -> Element:
        if e.space_id != self.domain.id:
            raise ValueError(f"{self.name}: expected point of {self.domain.id}")
        out = self.fn(e)
        if isinstance(out, Element):
            if out.space_id != self.codomain.id:
                raise ValueError(f"{self.name}: output in {out.space_id}")
            return out
        return self.codomain.element(out)


def is_affine(m: AffineMap, budget: int = 200, rng=None) -> Verdict:
    """Check m(p*x + (1-p)*y) == p*m(x) + (1-p)*m(y) over the p-grid.

    Exhaustive on finite carriers, sampled otherwise; a sampled run that
    finds nothing returns sampled-pass.
    """
    dom, cod = m.domain, m.codomain
    elems = dom.enumerate_elements()
    if elems is not None and len(elems) ** 2 * len(P_GRID) <= 20000:
        pairs = itertools.product(elems, elems)
        exhaustive = True
    else:
        if rng is None:
            raise ValueError("sampled affinity check needs an rng")
        pairs = ((dom.sample_element(rng), dom.sample_element(rng)) for _ in range(budget))
        exhaustive = False
    for x, y in pairs:
        for p in P_GRID:
            lhs = m(combine2(dom, p, x, y))
            rhs = combine2(cod, p, m(x), m(y))
            if lhs != rhs:
                return failed(
                    {
                        "map": m.name,
                        "p": str(p),
                        "x": dom.point_str(x),
                        "y": dom.point_str(y),
                        "lhs": cod.point_str(lhs),
                        "rhs": cod.point_str(rhs),
                    }
                )
    return passed(exhaustive)


def compose(outer: AffineMap, inner: AffineMap, name=None) -> AffineMap:
    if inner.codomain.id != outer.domain.id:
        raise ValueError("composition mismatch")
    return AffineMap(
        inner.domain,
        outer.codomain,
        lambda e: outer(inner(e)),
        name or f"{outer.name}.{inner.name}",
    )


# ---------------------------------------------------------------------------
# ideals and characteristic maps

RINF = ConvexSpaceSpec("Rinf", SpaceKind.MIXED, ExtendedLine(None, None))
RPLUS = ConvexSpaceSpec("Rplus", SpaceKind.MIXED, ExtendedLine(Fraction(0), None))


def ext_element(v) -> Element:
    return RINF.element(v if isinstance(v, ExtValue) else ExtValue(v))


def as_ext(e: Element) -> ExtValue:
    if not isinstance(e.payload, ExtValue):
        raise ValueError(f"{e} is not an extended value")
    return e.payload


@dataclass(frozen=True)
class Ideal:
    """A subset closed under combining its members with anything (the member
    keeps positive weight)."""

    space_id: str
    members: frozenset

    def member_list(self):
        return sorted(self.members, key=lambda e: payload_sort_key(e.payload))


def is_ideal(space: ConvexSpaceSpec, members: frozenset) -> bool:
    elems = space.enumerate_elements()
    if elems is None:
        raise ValueError("ideal check needs a finite carrier")
    for a in members:
        for b in elems:
            for p in P_GRID:
                if combine2(space, p, a, b) not in members:
                    return False
    return True


def enumerate_ideals(space: ConvexSpaceSpec):
    """All proper nonempty ideals of a finite space.

    Ideals are closed under union and every ideal is a union of principal
    ones, so we close the principal ideals under pairwise union.
    """
    elems = space.enumerate_elements()
    if elems is None:
        raise ValueError("enumerate_ideals needs a finite carrier")
    full = frozenset(elems)

    def principal(a):
        closed = {a}
        frontier = [a]
        while frontier:
            x = frontier.pop()
            for b in elems:
                for p in P_GRID:
                    c = combine2(space, p, x, b)
                    if c not in closed:
                        closed.add(c)
                        frontier.append(c)
        return frozenset(closed)

    found = set()
    for a in elems:
        pr = principal(a)
        if pr != full:
            found.add(pr)
    grew = True
    while grew:
        grew = False
        for one, two in itertools.combinations(list(found), 2):
            u = one | two
            if u != full and u not in found:
                found.add(u)
                grew = True
    out = [Ideal(space.id, m) for m in found if is_ideal(space, m)]
    out.sort(key=lambda i: (len(i.members), [payload_sort_key(e.payload) for e in i.member_list()]))
    return tuple(out)


def char_map(space: ConvexSpaceSpec, ideal: Ideal) -> AffineMap:
    """The {0, inf}-valued map of an ideal: inf on members, 0 elsewhere."""
    if ideal.space_id != space.id:
        raise ValueError("ideal belongs to a different space")
    members = ideal.members
    label = ",".join(_payload_str(e.payload) for e in Ideal(space.id, members).member_list())
    return AffineMap(
        space,
        RINF,
        lambda e: ext_element(INF) if e in members else ext_element(0),
        name=f"chi[{label}]",
    )


def coseparates(maps, space: ConvexSpaceSpec, budget: int = 400, rng=None) -> Verdict:
    """Do the maps distinguish every pair of distinct points?"""
    elems = space.enumerate_elements()
    if elems is not None:
        pairs = itertools.combinations(elems, 2)
        exhaustive = True
    else:
        if rng is None:
            raise ValueError("sampled coseparation check needs an rng")
        pairs = (
            (space.sample_element(rng), space.sample_element(rng)) for _ in range(budget)
        )
        exhaustive = False
    for x, y in pairs:
        if x == y:
            continue
        if all(m(x) == m(y) for m in maps):
            return failed({"x": space.point_str(x), "y": space.point_str(y)})
    return passed(exhaustive)


# ---------------------------------------------------------------------------
# order structure and classification


@dataclass(frozen=True)
class PosetReport:
    """The order y <= x iff p*y + (1-p)*x = x for all p, plus totality."""

    space_id: str
    le_pairs: tuple
    is_total: bool
    witness: dict = field(default_factory=dict)


def discrete_poset(space: ConvexSpaceSpec) -> PosetReport:
    elems = space.enumerate_elements()
    if elems is None:
        raise ValueError("discrete_poset needs a finite carrier")

    def le(y, x):
        return all(combine2(space, p, y, x) == x for p in P_GRID)

    le_pairs = tuple(
        (y, x) for y in elems for x in elems if le(y, x)
    )
    witness = {}
    total = True
    for x, y in itertools.combinations(elems, 2):
        for p in P_GRID:
            c = combine2(space, p, x, y)
            if c != x and c != y:
                total = False
                witness = {
                    "x": space.point_str(x),
                    "y": space.point_str(y),
                    "combines_to": space.point_str(c),
                    "p": str(p),
                }
                break
        if witness:
            break
        if not le(x, y) and not le(y, x):
            total = False
            witness = {"x": space.point_str(x), "y": space.point_str(y), "incomparable": "true"}
            break
    return PosetReport(space.id, le_pairs, total, witness)


@dataclass(frozen=True)
class KindReport:
    kind: SpaceKind
    declared: bool
    discrete_pair: Optional[tuple] = None
    geometric_pair: Optional[tuple] = None


def classify_kind(space: ConvexSpaceSpec) -> KindReport:
    """Exhaustive pair test on finite carriers: a pair is discrete-behaving
    when its combination is the same point for every grid p.  Infinite
    carriers return the declared kind."""
    elems = space.enumerate_elements()
    if elems is None or len(elems) > 64:
        return KindReport(space.kind, declared=True)
    disc = geo = None
    for x, y in itertools.combinations(elems, 2):
        results = {combine2(space, p, x, y) for p in P_GRID}
        if len(results) == 1:
            disc = disc or (x, y)
        else:
            geo = geo or (x, y)
    if disc and not geo:
        kind = SpaceKind.DISCRETE
    elif geo and not disc:
        kind = SpaceKind.GEOMETRIC
    elif disc and geo:
        kind = SpaceKind.MIXED
    else:
        kind = space.kind  # single-point carrier: keep the declaration
    return KindReport(kind, declared=False, discrete_pair=disc, geometric_pair=geo)


# ---------------------------------------------------------------------------
# constructors and built-in spaces


def interval_space(space_id, lo, hi) -> ConvexSpaceSpec:
    return ConvexSpaceSpec(space_id, SpaceKind.GEOMETRIC, Interval(Fraction(lo), Fraction(hi)))


def box_space(space_id, bounds) -> ConvexSpaceSpec:
    bb = tuple((Fraction(lo), Fraction(hi)) for lo, hi in bounds)
    return ConvexSpaceSpec(space_id, SpaceKind.GEOMETRIC, Box(bb))


def simplex_space(space_id, n) -> ConvexSpaceSpec:
    return ConvexSpaceSpec(space_id, SpaceKind.GEOMETRIC, Simplex(n))


def extended_line_space(space_id, lo, hi) -> ConvexSpaceSpec:
    lo = None if lo is None else Fraction(lo)
    hi = None if hi is None else Fraction(hi)
    return ConvexSpaceSpec(space_id, SpaceKind.MIXED, ExtendedLine(lo, hi))


def labels_space(space_id, labels, rule, center=None) -> ConvexSpaceSpec:
    return ConvexSpaceSpec(
        space_id, SpaceKind.DISCRETE, FiniteDiscrete(tuple(labels), rule, center)
    )


def naturals_space(space_id, n, rule="min") -> ConvexSpaceSpec:
    return labels_space(space_id, tuple(range(n)), rule)


def product_space(a: ConvexSpaceSpec, b: ConvexSpaceSpec, space_id=None) -> ConvexSpaceSpec:
    comps = (a, b)
    kinds = {c.kind for c in comps}
    kind = kinds.pop() if len(kinds) == 1 else SpaceKind.MIXED
    return ConvexSpaceSpec(space_id or f"({a.id}x{b.id})", kind, Product(comps))


def semidirect_space(branch_space, components, gluings, space_id) -> ConvexSpaceSpec:
    """components: list of (branch_label, space); gluings: list of Gluing."""
    carrier = Branched(branch_space, tuple(components), tuple(gluings))
    # every losing->winning transition must be reachable
    labels = [lab for lab, _ in components]
    for a in labels:
        for b in labels:
            if a != b and _needs_transition(branch_space, a, b):
                carrier._transition_target(a, b)
    return ConvexSpaceSpec(space_id, SpaceKind.MIXED, carrier)


def _needs_transition(branch_space, a, b) -> bool:
    # a loses to b when combining the two labels yields b
    return all(
        combine2(branch_space, p, branch_space.element(a), branch_space.element(b)).payload == b
        for p in P_GRID
    )


def projection(prod: ConvexSpaceSpec, index: int) -> AffineMap:
    comp = prod.carrier.components[index]
    return AffineMap(prod, comp, lambda e: comp.element(e.payload[index]), name=f"proj{index}")


def pair_element(prod: ConvexSpaceSpec, x: Element, y: Element) -> Element:
    return prod.element((x.payload, y.payload))


def builtin_spaces() -> dict:
    """The standard space menu used by tests and the CLI."""
    unit = interval_space("unit_interval", 0, 1)
    d4 = naturals_space("D4-min", 4)
    two = labels_space("two", ("0", "1"), "max")
    branches = labels_space("vee-branches", ("L", "H"), "max")
    arm_l = interval_space("vee-L", 0, 1)
    arm_h = interval_space("vee-H", 0, 1)
    spaces = [
        unit,
        box_space("box2", [(0, 1), (0, 1)]),
        simplex_space("simplex3", 3),
        extended_line_space("rinf-grid", -4, 4),
        ConvexSpaceSpec(
            "rplus-grid", SpaceKind.MIXED, ExtendedLine(Fraction(0), Fraction(4))
        ),
        naturals_space("N-min", 32),
        labels_space("chain-max", ("a", "b", "c", "d", "e"), "max"),
        two,
        d4,
        # carrier listed (0,1,u): the first incomparable pair and the first
        # compatibility violation then involve 0 and 1
        ConvexSpaceSpec(
            "C",
            SpaceKind.DISCRETE,
            FiniteDiscrete(("0", "1", "u"), "collapse", "u"),
            expect_reject=True,
        ),
        product_space(unit, d4, "GxD"),
        semidirect_space(
            branches,
            [("L", arm_l), ("H", arm_h)],
            [Gluing("L", "H", Fraction(0), ident=Fraction(0))],
            "vee",
        ),
        labels_space("point", ("*",), "min"),
        RINF,
        RPLUS,
    ]
    return {s.id: s for s in spaces}
