"""Finitely supported probability measures with exact rational weights.

FinMeasure is the one-level measure; MetaMeasure is a measure over measures.
Together with dirac / pushforward / mu they realize the finite-support
probability functor, and all identities tested downstream (unit and
associativity of flattening, naturality, linearity of expectation) are
checked with exact Fraction arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .extvalue import ExtValue, ext_sum
from .spaces import (
    AffineMap,
    ConvexSpaceSpec,
    Element,
    WeightVector,
    _split_top,
    as_ext,
    payload_sort_key,
)


@dataclass(frozen=True)
class FinMeasure:
    """Atoms are deduplicated, positively weighted, sorted canonically, and
    the weights sum to exactly one."""

    space_id: str
    atoms: tuple  # ((Element, Fraction), ...)

    @classmethod
    def from_pairs(cls, space_id: str, pairs) -> "FinMeasure":
        merged = {}
        for e, w in pairs:
            w = Fraction(w)
            if w < 0:
                raise ValueError(f"negative weight {w}")
            if w == 0:
                continue
            if not isinstance(e, Element) or e.space_id != space_id:
                raise ValueError(f"atom {e!r} does not live in {space_id}")
            merged[e] = merged.get(e, Fraction(0)) + w
        if not merged:
            raise ValueError("measure with no mass")
        total = sum(merged.values())
        if total != 1:
            raise ValueError(f"total mass {total}, expected 1")
        atoms = tuple(
            sorted(merged.items(), key=lambda kv: payload_sort_key(kv[0].payload))
        )
        return cls(space_id, atoms)

    def support(self):
        return tuple(e for e, _ in self.atoms)

    def mass(self, e: Element) -> Fraction:
        for a, w in self.atoms:
            if a == e:
                return w
        return Fraction(0)

    def sort_key(self):
        return (
            self.space_id,
            tuple((payload_sort_key(e.payload), w) for e, w in self.atoms),
        )


@dataclass(frozen=True)
class MetaMeasure:
    """A measure whose atoms are FinMeasures on a common base space."""

    space_id: str
    atoms: tuple  # ((FinMeasure, Fraction), ...)

    @classmethod
    def from_pairs(cls, space_id: str, pairs) -> "MetaMeasure":
        merged = {}
        for P, w in pairs:
            w = Fraction(w)
            if w < 0:
                raise ValueError(f"negative weight {w}")
            if w == 0:
                continue
            if not isinstance(P, FinMeasure) or P.space_id != space_id:
                raise ValueError(f"inner measure on {getattr(P, 'space_id', '?')}, expected {space_id}")
            merged[P] = merged.get(P, Fraction(0)) + w
        if not merged:
            raise ValueError("meta-measure with no mass")
        total = sum(merged.values())
        if total != 1:
            raise ValueError(f"total mass {total}, expected 1")
        atoms = tuple(sorted(merged.items(), key=lambda kv: kv[0].sort_key()))
        return cls(space_id, atoms)

    def support(self):
        return tuple(P for P, _ in self.atoms)


def dirac(x: Element) -> FinMeasure:
    return FinMeasure.from_pairs(x.space_id, [(x, Fraction(1))])


def dirac_meta(P: FinMeasure) -> MetaMeasure:
    return MetaMeasure.from_pairs(P.space_id, [(P, Fraction(1))])


def pushforward(f, P: FinMeasure) -> FinMeasure:
    """Image measure; colliding images merge exactly."""
    outs = []
    for e, w in P.atoms:
        y = f(e)
        if not isinstance(y, Element):
            raise ValueError(f"pushforward map returned {y!r}")
        outs.append((y, w))
    target = f.codomain.id if isinstance(f, AffineMap) else outs[0][0].space_id
    return FinMeasure.from_pairs(target, outs)


def mu(Q: MetaMeasure) -> FinMeasure:
    """Flatten a measure over measures: weights multiply and atoms merge."""
    pairs = []
    for P, q in Q.atoms:
        for e, w in P.atoms:
            pairs.append((e, q * w))
    return FinMeasure.from_pairs(Q.space_id, pairs)


def convex_combine_measures(weights, measures) -> FinMeasure:
    """Pointwise mixture sum_i w_i * P_i, independent of mu for cross-checks."""
    ws = list(weights.weights if isinstance(weights, WeightVector) else map(Fraction, weights))
    Ps = list(measures)
    if len(ws) != len(Ps):
        raise ValueError("weights and measures differ in length")
    if sum(ws) != 1 or any(w < 0 for w in ws):
        raise ValueError("weights must be nonnegative and sum to 1")
    space_id = Ps[0].space_id
    pairs = []
    for w, P in zip(ws, Ps):
        if w == 0:
            continue
        for e, pw in P.atoms:
            pairs.append((e, w * pw))
    return FinMeasure.from_pairs(space_id, pairs)


def mix_meta(weights, metas) -> MetaMeasure:
    """Mixture of meta-measures (the outer flattening of a depth-3 tower)."""
    ws = list(weights.weights if isinstance(weights, WeightVector) else map(Fraction, weights))
    Qs = list(metas)
    pairs = []
    for w, Q in zip(ws, Qs):
        for P, q in Q.atoms:
            pairs.append((P, w * q))
    return MetaMeasure.from_pairs(Qs[0].space_id, pairs)


def map_inner(f, Q: MetaMeasure) -> MetaMeasure:
    """Apply a pushforward to every inner measure (functor action on G)."""
    outs = [(pushforward(f, P), w) for P, w in Q.atoms]
    return MetaMeasure.from_pairs(outs[0][0].space_id, outs)


def support(P: FinMeasure):
    return P.support()


def measure_eval(P: FinMeasure, members) -> Fraction:
    """P(U) for a finite set U of elements."""
    members = set(members)
    return sum((w for e, w in P.atoms if e in members), Fraction(0))


def expectation_functional(P: FinMeasure, m) -> ExtValue:
    """E_P(m) = sum_i p_i * m(x_i) with absorbing inf arithmetic."""
    terms = []
    for e, w in P.atoms:
        v = m(e)
        v = as_ext(v) if isinstance(v, Element) else ExtValue(v)
        terms.append(w * v)
    return ext_sum(terms)


# ---------------------------------------------------------------------------
# canonical text form: "measure on <space>: <point>:<num>/<den>, ..."


def to_text(P: FinMeasure, space: ConvexSpaceSpec) -> str:
    if space.id != P.space_id:
        raise ValueError("space mismatch")
    parts = [
        f"{space.point_str(e)}:{w.numerator}/{w.denominator}" for e, w in P.atoms
    ]
    return f"measure on {space.id}: " + ", ".join(parts)


def parse_measure(text: str, space: ConvexSpaceSpec) -> FinMeasure:
    text = text.strip()
    head, sep, body = text.partition(":")
    if not sep:
        raise ValueError("expected 'measure on <space>: ...'")
    head_parts = head.split()
    if head_parts[:2] != ["measure", "on"] or len(head_parts) != 3:
        raise ValueError(f"bad measure header {head!r}")
    if head_parts[2] != space.id:
        raise ValueError(f"measure declares space {head_parts[2]!r}, expected {space.id!r}")
    pairs = []
    for chunk in _split_top(body, ","):
        chunk = chunk.strip()
        if not chunk:
            raise ValueError("empty atom entry")
        point_str, sep, weight_str = chunk.rpartition(":")
        if not sep:
            raise ValueError(f"atom {chunk!r} lacks a :weight part")
        if "/" not in weight_str:
            raise ValueError(f"weight {weight_str!r} must be <num>/<den>")
        pairs.append((space.parse_element(point_str.strip()), Fraction(weight_str)))
    return FinMeasure.from_pairs(space.id, pairs)
