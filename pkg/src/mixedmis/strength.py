"""Per-agent strength distributions over [0,1], queried at dyadic points.

An agent's per-round value is the real number behind an infinite binary
expansion; its distribution is described by how each bit is drawn.  The
analysis surface only ever needs the CDF at dyadic points 1/2^level, which is
exactly the probability that the first ``level`` bits are all zero, so that is
the only CDF query offered.  Queries return exact rationals for the
bit-generable kinds; tabulated tables carry floats and a 1e-12 comparison
tolerance.

Mass near zero means strength: under the min-wins protocol an agent whose CDF
is large at small x is more likely to win its neighborhood.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from . import rng

Rational = Union[int, float, str, Fraction]

#: depth used by condition checks when none is given; deeper levels carry
#: probability mass below 2^-64 and are unobservable in simulation
DEFAULT_CHECK_DEPTH = 64

_TABULATED_TOL = Fraction(1, 10**12)
_TWO64 = 1 << 64


class UnsupportedSamplingError(TypeError):
    """Raised when bits are requested from a non-samplable distribution."""


class LevelRangeError(ValueError):
    """Raised when a dyadic CDF query exceeds a table's tabulated range."""


def as_fraction(value: Rational) -> Fraction:
    """Exact rational from int, Fraction, 'a/b' string, or float (exact binary value)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class ConditionParams:
    """Decay constants bounding every agent CDF from below and above.

    The lower constant says the CDF may lose at most a factor ``eps_lower``
    per halving of x (not too steep); the upper constant says it must lose at
    least a factor ``eps_upper`` (not too flat).
    """

    eps_lower: Fraction
    eps_upper: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eps_lower", as_fraction(self.eps_lower))
        object.__setattr__(self, "eps_upper", as_fraction(self.eps_upper))
        if not (0 < self.eps_lower <= self.eps_upper < 1):
            raise ValueError(
                f"need 0 < eps_lower <= eps_upper < 1, got "
                f"({self.eps_lower}, {self.eps_upper})"
            )

    @property
    def level_threshold(self) -> Fraction:
        """Neighborhood-CDF threshold eps_lower/2 used by level computations."""
        return self.eps_lower / 2

    @property
    def upper_gap(self) -> Fraction:
        """1 - eps_upper."""
        return 1 - self.eps_upper


DEFAULT_PARAMS = ConditionParams(Fraction(1, 4), Fraction(1, 2))


class StrengthDistribution:
    """Base class; see FairBits, BiasedBits, BitSchedule, TabulatedDyadic."""

    kind: str = "abstract"
    bit_generable: bool = False

    def cdf_dyadic(self, level: int) -> Fraction:
        """Pr[value <= 1/2^level]; equals Pr[first ``level`` bits are all 0]."""
        raise NotImplementedError

    def zero_probability(self, position: int) -> Fraction:
        """Probability that bit ``position`` (0-based) is 0."""
        raise UnsupportedSamplingError(
            f"{self.kind} distributions cannot be sampled bit-by-bit"
        )

    def spec(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class FairBits(StrengthDistribution):
    """Every bit is 0 or 1 with equal probability; the value is uniform on [0,1]."""

    kind: str = field(default="fair_bits", init=False)
    bit_generable = True

    def cdf_dyadic(self, level: int) -> Fraction:
        _check_level(level)
        return Fraction(1, 2**level)

    def zero_probability(self, position: int) -> Fraction:
        return Fraction(1, 2)

    def spec(self) -> dict:
        return {"kind": "fair_bits"}


@dataclass(frozen=True)
class BiasedBits(StrengthDistribution):
    """Every bit is 0 with fixed probability q; the dyadic CDF is exactly q^level."""

    q: Fraction
    kind: str = field(default="biased_bits", init=False)
    bit_generable = True

    def __post_init__(self):
        object.__setattr__(self, "q", as_fraction(self.q))
        if not (0 <= self.q <= 1):
            raise ValueError(f"bit bias must lie in [0, 1], got {self.q}")

    def cdf_dyadic(self, level: int) -> Fraction:
        _check_level(level)
        return self.q**level

    def zero_probability(self, position: int) -> Fraction:
        return self.q

    def spec(self) -> dict:
        return {"kind": "biased_bits", "q": _num(self.q)}


@dataclass(frozen=True)
class BitSchedule(StrengthDistribution):
    """Each bit position has its own zero-probability; positions past the end repeat the last bias.

    When ``params`` is given, every bias must lie in [eps_lower, eps_upper];
    that is the construction-time guarantee that the decay conditions hold at
    every depth.
    """

    biases: tuple
    kind: str = field(default="bit_schedule", init=False)
    bit_generable = True

    def __init__(self, biases, params: ConditionParams | None = None):
        bs = tuple(as_fraction(b) for b in biases)
        if not bs:
            raise ValueError("bit schedule needs at least one bias")
        for b in bs:
            if not (0 < b < 1):
                raise ValueError(f"schedule biases must lie in (0, 1), got {b}")
            if params is not None and not (params.eps_lower <= b <= params.eps_upper):
                raise ValueError(
                    f"schedule bias {b} outside [{params.eps_lower}, {params.eps_upper}]"
                )
        object.__setattr__(self, "biases", bs)

    def cdf_dyadic(self, level: int) -> Fraction:
        _check_level(level)
        out = Fraction(1)
        for k in range(level):
            out *= self.zero_probability(k)
        return out

    def zero_probability(self, position: int) -> Fraction:
        return self.biases[min(position, len(self.biases) - 1)]

    def spec(self) -> dict:
        return {"kind": "bit_schedule", "biases": [_num(b) for b in self.biases]}


@dataclass(frozen=True)
class TabulatedDyadic(StrengthDistribution):
    """CDF values tabulated at 1/2^level for level = 0..L; analysis only, not samplable."""

    values: tuple
    kind: str = field(default="tabulated", init=False)
    bit_generable = False

    def __init__(self, values):
        vs = tuple(float(v) for v in values)
        if not vs or vs[0] != 1.0:
            raise ValueError("tabulated CDF must start with value 1 at level 0")
        if any(not (0.0 <= v <= 1.0) for v in vs):
            raise ValueError("tabulated CDF values must lie in [0, 1]")
        if any(b > a + 1e-12 for a, b in zip(vs, vs[1:])):
            raise ValueError("tabulated CDF must be non-increasing")
        object.__setattr__(self, "values", vs)

    @property
    def max_level(self) -> int:
        return len(self.values) - 1

    def cdf_dyadic(self, level: int) -> Fraction:
        _check_level(level)
        if level > self.max_level:
            raise LevelRangeError(
                f"level {level} exceeds tabulated range (max supported level "
                f"is {self.max_level})"
            )
        return Fraction(self.values[level])

    def spec(self) -> dict:
        return {"kind": "tabulated", "cdf": list(self.values)}


def _check_level(level: int) -> None:
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")


def _num(x: Fraction):
    """JSON-friendly number: int when integral, 'a/b' string otherwise."""
    if x.denominator == 1:
        return int(x)
    f = float(x)
    return f if Fraction(f) == x else f"{x.numerator}/{x.denominator}"


def cdf_dyadic(dist: StrengthDistribution, level: int) -> Fraction:
    """Pr[value drawn from ``dist`` <= 1/2^level]."""
    return dist.cdf_dyadic(level)


@dataclass(frozen=True)
class LevelCheck:
    level: int
    lower_ok: bool
    upper_ok: bool


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of checking the decay conditions up to a finite depth.

    ``checked_depth`` is recorded because the conditions quantify over all
    levels while any check is necessarily finite; for the closed bit-generable
    families a finite check plus the construction-time bias range covers all
    depths.
    """

    checks: tuple
    checked_depth: int
    passed: bool
    first_failure: LevelCheck | None

    def failures(self):
        return [c for c in self.checks if not (c.lower_ok and c.upper_ok)]


def check_conditions(
    dist: StrengthDistribution,
    params: ConditionParams,
    max_level: int = DEFAULT_CHECK_DEPTH,
) -> ConditionReport:
    """Check eps_lower * cdf(l) <= cdf(l+1) <= eps_upper * cdf(l) for l < max_level.

    Comparisons are exact rational arithmetic for bit-generable kinds and use
    a 1e-12 tolerance for tabulated tables.
    """
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    tol = Fraction(0) if dist.bit_generable else _TABULATED_TOL
    checks = []
    first_failure = None
    prev = dist.cdf_dyadic(0)
    for level in range(max_level):
        cur = dist.cdf_dyadic(level + 1)
        lower_ok = cur >= params.eps_lower * prev - tol
        upper_ok = cur <= params.eps_upper * prev + tol
        check = LevelCheck(level, lower_ok, upper_ok)
        checks.append(check)
        if first_failure is None and not (lower_ok and upper_ok):
            first_failure = check
        prev = cur
    return ConditionReport(
        checks=tuple(checks),
        checked_depth=max_level,
        passed=first_failure is None,
        first_failure=first_failure,
    )


def decay_upper_bound_check(
    dist: StrengthDistribution,
    params: ConditionParams,
    max_level: int = DEFAULT_CHECK_DEPTH,
) -> bool:
    """True iff cdf(l) <= eps_upper^l for every l <= max_level.

    This is the geometric decay implied by the upper condition; it is restated
    here at the level where it is directly assertable.
    """
    tol = Fraction(0) if dist.bit_generable else _TABULATED_TOL
    bound = Fraction(1)
    for level in range(max_level + 1):
        if dist.cdf_dyadic(level) > bound + tol:
            return False
        bound *= params.eps_upper
    return True


# --- lazy bit streams -------------------------------------------------------

def le_threshold(q: Fraction) -> tuple[int, bool]:
    """Engine form of a zero-probability: (threshold, always_one).

    Bit is 0 iff the uniform 64-bit word is <= threshold, except when
    ``always_one`` is set (q so small that floor(q * 2^64) = 0).  Using <=
    against floor(q * 2^64) - 1 keeps q = 1 exact (bit 0 always).
    """
    t = (q.numerator << 64) // q.denominator
    if t == 0:
        return 0, True
    return t - 1, False


@dataclass
class BitStreamSample:
    """One agent's value in one round, materialized bit-by-bit on demand.

    Bit k is a pure function of (seed, owner, round, k); requesting the same
    position twice always returns the same bit.
    """

    seed: int
    owner: int
    round_index: int
    _bits: list = field(default_factory=list, repr=False)

    def known_bits(self) -> tuple:
        return tuple(self._bits)


def next_bit(sample: BitStreamSample, dist: StrengthDistribution, position: int) -> int:
    """Bit ``position`` of the sample's binary expansion under ``dist``."""
    if not dist.bit_generable:
        raise UnsupportedSamplingError(
            f"{dist.kind} distributions are analysis-only and cannot be sampled"
        )
    if position < 0:
        raise ValueError("bit position must be >= 0")
    while len(sample._bits) <= position:
        k = len(sample._bits)
        w = rng.word_at(sample.seed, sample.owner, sample.round_index, k)
        t, always_one = le_threshold(dist.zero_probability(k))
        bit = 1 if always_one else (0 if w <= t else 1)
        sample._bits.append(bit)
    return sample._bits[position]


# --- config file specs ------------------------------------------------------

def distribution_from_spec(obj: dict) -> StrengthDistribution:
    """Build a distribution from its config-file form.

    Recognized forms::

        {"kind": "fair_bits"}
        {"kind": "biased_bits", "q": 0.25}
        {"kind": "bit_schedule", "biases": [0.5, "1/3", 0.25]}
        {"kind": "tabulated", "cdf": [1.0, 0.5, 0.25]}

    Numbers may be JSON numbers or exact 'a/b' strings.
    """
    kind = obj.get("kind")
    if kind == "fair_bits":
        return FairBits()
    if kind == "biased_bits":
        return BiasedBits(as_fraction(obj["q"]))
    if kind == "bit_schedule":
        return BitSchedule([as_fraction(b) for b in obj["biases"]])
    if kind == "tabulated":
        return TabulatedDyadic(obj["cdf"])
    raise ValueError(f"unknown distribution kind: {kind!r}")


def distribution_to_spec(dist: StrengthDistribution) -> dict:
    return dist.spec()
