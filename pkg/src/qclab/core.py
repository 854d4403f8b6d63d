"""Exact building blocks: hypercube points, Boolean functions, relations,
distributions and subcubes, plus the bias / conditioning machinery.

Conventions used throughout the package:

* A point of ``{0,1}^k`` is an integer in ``[0, 2^k)``.  Variable ``j``
  (0-based) is bit ``j`` of the index, so index 0 is the all-zeros input.
  File formats expose 1-based variable indices; the leftmost character of a
  bitstring is variable 1 (bit 0).
* All probabilities are :class:`fractions.Fraction`; nothing in this module
  touches floating point.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

ZERO = Fraction(0)
ONE = Fraction(1)

DEFAULT_CAPS = {
    "arity": 16,  # largest truth table / distribution arity
    "dp": 12,     # largest arity accepted by the exact DP
    "flat": 12,   # largest arity for flat expansion of structured dists
}


def caps() -> dict:
    """Current size caps, honouring the QCLAB_CAP_OVERRIDE env variable.

    The override format is ``name=value[,name=value...]`` with names
    ``arity``, ``dp`` and ``flat``.
    """
    out = dict(DEFAULT_CAPS)
    raw = os.environ.get("QCLAB_CAP_OVERRIDE", "")
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, value = part.partition("=")
        if name not in out or not value.isdigit():
            raise CapExceeded(f"bad QCLAB_CAP_OVERRIDE entry: {part!r}")
        out[name] = int(value)
    return out


class QclabError(Exception):
    """Base class for all package errors."""


class ArityMismatch(QclabError):
    pass


class CapExceeded(QclabError):
    pass


class ZeroConditioningMass(QclabError):
    """A conditioning event has probability zero."""


class NotARefinement(QclabError):
    """Conditional probability requested for a non-nested subcube pair."""


class HypothesisViolated(QclabError):
    """A verifier was invoked outside its hypothesis."""


class Unachievable(QclabError):
    pass


class InnerComplexityZero(QclabError):
    pass


class ParseError(QclabError):
    pass


def bit(x: int, j: int) -> int:
    return (x >> j) & 1


def bits(x: int, k: int) -> tuple[int, ...]:
    return tuple((x >> j) & 1 for j in range(k))


def index_of(bitseq: Iterable[int]) -> int:
    x = 0
    for j, b in enumerate(bitseq):
        if b:
            x |= 1 << j
    return x


@dataclass(frozen=True)
class TruthTable:
    """A total Boolean function on ``arity`` bits, stored as its value table."""

    arity: int
    outputs: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise QclabError("arity must be >= 1")
        if self.arity > caps()["arity"]:
            raise CapExceeded(f"arity {self.arity} exceeds cap")
        if len(self.outputs) != 1 << self.arity:
            raise QclabError("outputs length must be 2^arity")
        if any(b not in (0, 1) for b in self.outputs):
            raise QclabError("outputs must be bits")

    @classmethod
    def from_callable(cls, arity: int, fn) -> "TruthTable":
        return cls(arity, tuple(fn(bits(x, arity)) for x in range(1 << arity)))

    def value(self, x: int) -> int:
        if not 0 <= x < (1 << self.arity):
            raise ArityMismatch(f"point {x} out of range for arity {self.arity}")
        return self.outputs[x]

    def preimage(self, b: int) -> list[int]:
        return [x for x, v in enumerate(self.outputs) if v == b]

    def complement(self) -> "TruthTable":
        return TruthTable(self.arity, tuple(1 - v for v in self.outputs))


def eval_fn(g: TruthTable, x: int) -> int:
    """Evaluate ``g`` at point ``x``."""
    return g.value(x)


# A few standard functions used all over the test fixtures and CLI demos.

def identity1() -> TruthTable:
    return TruthTable(1, (0, 1))


def and_fn(k: int) -> TruthTable:
    return TruthTable(k, tuple(1 if x == (1 << k) - 1 else 0 for x in range(1 << k)))


def or_fn(k: int) -> TruthTable:
    return TruthTable(k, tuple(0 if x == 0 else 1 for x in range(1 << k)))


def xor_fn(k: int) -> TruthTable:
    return TruthTable(k, tuple(bin(x).count("1") & 1 for x in range(1 << k)))


def maj3() -> TruthTable:
    return TruthTable(3, tuple(1 if bin(x).count("1") >= 2 else 0 for x in range(8)))


def constant_fn(k: int, b: int) -> TruthTable:
    return TruthTable(k, (b,) * (1 << k))


@dataclass(frozen=True)
class Relation:
    """A total relation on ``{0,1}^arity x {0..alphabet_size-1}``.

    ``accepted[x]`` is the set of outputs considered correct on input ``x``.
    Every set must be nonempty; "don't care" inputs accept all outputs.
    """

    arity: int
    alphabet_size: int
    accepted: tuple[frozenset, ...]

    def __post_init__(self):
        if self.arity < 1 or self.alphabet_size < 1:
            raise QclabError("arity and alphabet size must be >= 1")
        if len(self.accepted) != 1 << self.arity:
            raise QclabError("accepted length must be 2^arity")
        rng = range(self.alphabet_size)
        for x, s in enumerate(self.accepted):
            if not s:
                raise QclabError(f"accepted set empty at input {x}")
            if any(r not in rng for r in s):
                raise QclabError(f"label out of range at input {x}")

    @classmethod
    def from_function(cls, g: TruthTable) -> "Relation":
        return cls(g.arity, 2, tuple(frozenset((v,)) for v in g.outputs))

    def accepts(self, x: int, r: int) -> bool:
        return r in self.accepted[x]


@dataclass(frozen=True)
class Subcube:
    """Inputs consistent with a partial assignment; ``fixed`` maps variable
    index to the assigned bit.  Codimension = number of fixed variables."""

    arity: int
    fixed: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for var, b in self.fixed:
            if not 0 <= var < self.arity:
                raise QclabError(f"variable {var} out of range")
            if b not in (0, 1):
                raise QclabError("assignment must be a bit")
            if var in seen:
                raise QclabError(f"variable {var} fixed twice")
            seen.add(var)
        if self.fixed != tuple(sorted(self.fixed)):
            object.__setattr__(self, "fixed", tuple(sorted(self.fixed)))

    @classmethod
    def full(cls, arity: int) -> "Subcube":
        return cls(arity, ())

    @classmethod
    def from_mapping(cls, arity: int, fixed: Mapping[int, int]) -> "Subcube":
        return cls(arity, tuple(sorted(fixed.items())))

    @property
    def codim(self) -> int:
        return len(self.fixed)

    @property
    def assignment(self) -> dict:
        return dict(self.fixed)

    def contains(self, x: int) -> bool:
        return all((x >> var) & 1 == b for var, b in self.fixed)

    def refine(self, var: int, b: int) -> "Subcube":
        fixed = self.assignment
        if var in fixed:
            raise QclabError(f"variable {var} already fixed")
        fixed[var] = b
        return Subcube.from_mapping(self.arity, fixed)

    def extends(self, other: "Subcube") -> bool:
        """True when this subcube refines ``other`` (fixes a superset,
        consistently)."""
        mine = self.assignment
        return all(mine.get(var) == b for var, b in other.fixed)

    def points(self) -> Iterator[int]:
        fixed_vars = {var for var, _ in self.fixed}
        free = [j for j in range(self.arity) if j not in fixed_vars]
        base = 0
        for var, b in self.fixed:
            base |= b << var
        for s in range(1 << len(free)):
            x = base
            for pos, var in enumerate(free):
                x |= ((s >> pos) & 1) << var
            yield x


@dataclass(frozen=True)
class Dist:
    """An exact probability distribution on ``{0,1}^arity``."""

    arity: int
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.arity > caps()["arity"]:
            raise CapExceeded(f"arity {self.arity} exceeds cap")
        if len(self.probs) != 1 << self.arity:
            raise QclabError("probs length must be 2^arity")
        if any(p < 0 for p in self.probs):
            raise QclabError("negative probability")
        if sum(self.probs) != 1:
            raise QclabError("probabilities must sum to exactly 1")

    @classmethod
    def uniform(cls, arity: int) -> "Dist":
        p = Fraction(1, 1 << arity)
        return cls(arity, (p,) * (1 << arity))

    @classmethod
    def point_mass(cls, arity: int, x: int) -> "Dist":
        probs = [ZERO] * (1 << arity)
        probs[x] = ONE
        return cls(arity, tuple(probs))

    @classmethod
    def from_weights(cls, weights) -> "Dist":
        weights = [Fraction(w) for w in weights]
        total = sum(weights)
        if total <= 0:
            raise QclabError("weights must have positive total")
        k = (len(weights) - 1).bit_length()
        if len(weights) != 1 << k:
            raise QclabError("weight vector length must be a power of two")
        return cls(k, tuple(w / total for w in weights))

    def prob(self, x: int) -> Fraction:
        return self.probs[x]

    def support(self) -> list[int]:
        return [x for x, p in enumerate(self.probs) if p > 0]

    def mass_where(self, predicate) -> Fraction:
        return sum((p for x, p in enumerate(self.probs) if p and predicate(x)), ZERO)


def _check_arity(a: int, b: int) -> None:
    if a != b:
        raise ArityMismatch(f"arity mismatch: {a} != {b}")


def restrict_dist(mu: Dist, g: TruthTable, b: int) -> Dist:
    """Condition ``mu`` on ``g(x) = b`` and renormalize exactly."""
    _check_arity(mu.arity, g.arity)
    mass = sum((p for x, p in enumerate(mu.probs) if p and g.outputs[x] == b), ZERO)
    if mass == 0:
        raise ZeroConditioningMass(f"Pr[g={b}] = 0")
    probs = tuple(p / mass if g.outputs[x] == b else ZERO
                  for x, p in enumerate(mu.probs))
    return Dist(mu.arity, probs)


def subcube_prob(mu: Dist, cube: Subcube) -> Fraction:
    _check_arity(mu.arity, cube.arity)
    return sum((mu.probs[x] for x in cube.points()), ZERO)


def cond_prob(mu: Dist, c2: Subcube, c1: Subcube) -> Fraction:
    """Exact ``Pr_mu[c2 | c1]``; ``c2`` must refine ``c1``."""
    if not c2.extends(c1):
        raise NotARefinement("second subcube does not extend the first")
    denom = subcube_prob(mu, c1)
    if denom == 0:
        raise ZeroConditioningMass("conditioning subcube has zero mass")
    return subcube_prob(mu, c2) / denom


def bias(g: TruthTable, mu: Dist, cube: Subcube) -> Fraction:
    """|Pr[g=0 | cube] - Pr[g=1 | cube]| under ``mu``."""
    _check_arity(mu.arity, g.arity)
    _check_arity(mu.arity, cube.arity)
    m0 = ZERO
    m1 = ZERO
    for x in cube.points():
        p = mu.probs[x]
        if p:
            if g.outputs[x]:
                m1 += p
            else:
                m0 += p
    total = m0 + m1
    if total == 0:
        raise ZeroConditioningMass("subcube has zero mass")
    return abs(m0 - m1) / total


@dataclass(frozen=True)
class FullBiasReport:
    min_mass: Fraction
    full_bias: Fraction
    min_mass_exceeds_eps: bool
    bias_below_bound: bool

    @property
    def holds(self) -> bool:
        return self.min_mass_exceeds_eps and self.bias_below_bound


def check_fullbias(g: TruthTable, mu: Dist, eps: Fraction) -> FullBiasReport:
    """Evaluate the two quantities whose bounds are implied by positive
    distributional complexity: min_b Pr[g=b] vs eps and the full-cube bias
    vs 1 - 2*eps.  The caller supplies the complexity hypothesis."""
    eps = Fraction(eps)
    if not 0 <= eps < Fraction(1, 2):
        raise HypothesisViolated("eps must lie in [0, 1/2)")
    _check_arity(mu.arity, g.arity)
    m1 = sum((p for x, p in enumerate(mu.probs) if p and g.outputs[x]), ZERO)
    m0 = 1 - m1
    min_mass = min(m0, m1)
    full_bias = abs(m0 - m1)
    return FullBiasReport(
        min_mass=min_mass,
        full_bias=full_bias,
        min_mass_exceeds_eps=min_mass > eps,
        bias_below_bound=full_bias < 1 - 2 * eps,
    )
