"""Exact finitely-supported subdistributions over symbolic outcomes.

A subdistribution assigns a positive rational weight to finitely many
outcomes, with total mass at most 1.  Missing mass records the failure
probability of earlier observations.  All arithmetic is exact: weights
are `fractions.Fraction` values and floats are rejected outright.

Outcomes are symbols (plain strings), integers (including `Dollar`,
an integer that prints with a ``$`` prefix), flat tuples of outcomes,
or frozensets of outcomes.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

from .errors import (
    DomainError,
    EmptySupport,
    InvalidSubdistribution,
    NonNumericOutcome,
    PredicateTypeError,
)

Outcome = Union[str, int, tuple, frozenset]

ZERO = Fraction(0)
ONE = Fraction(1)


class Dollar(int):
    """An integer outcome rendered with a dollar prefix, e.g. ``$10``."""

    def __repr__(self) -> str:
        return f"${int(self)}"

    __str__ = __repr__


class Failure:
    """Singleton returned by `rescale` on the zero subdistribution."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Failure"


FAILURE = Failure()


def as_weight(value) -> Fraction:
    """Coerce an exact number to Fraction; floats are a hard error."""
    if isinstance(value, float):
        raise InvalidSubdistribution(f"float weight {value!r}; weights must be exact rationals")
    if isinstance(value, bool):
        raise InvalidSubdistribution("bool is not a weight")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    raise InvalidSubdistribution(f"not a rational weight: {value!r}")


def outcome_key(x: Outcome):
    """Total ordering key: integers, then symbols, then tuples, then sets."""
    if isinstance(x, bool):
        raise InvalidSubdistribution("bool is not an outcome")
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, str):
        return (1, x)
    if isinstance(x, tuple):
        return (2, [outcome_key(e) for e in x])
    if isinstance(x, frozenset):
        return (3, sorted(outcome_key(e) for e in x))
    raise InvalidSubdistribution(f"not an outcome: {x!r}")


def render_outcome(x: Outcome) -> str:
    """Canonical text of one outcome, as it appears inside a ket."""
    if isinstance(x, Dollar):
        return repr(x)
    if isinstance(x, (int, str)):
        return str(x)
    if isinstance(x, tuple):
        return ",".join(render_outcome(e) for e in x)
    if isinstance(x, frozenset):
        inner = ",".join(render_outcome(e) for e in sorted(x, key=outcome_key))
        return "{" + inner + "}"
    raise InvalidSubdistribution(f"not an outcome: {x!r}")


def render_weight(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def _flat(x: Outcome) -> tuple:
    return x if isinstance(x, tuple) else (x,)


def _unflat(t: tuple) -> Outcome:
    return t[0] if len(t) == 1 else t


class Subdist:
    """Immutable finite map from outcomes to positive rational weights.

    Zero weights are dropped at construction, so the support is exactly
    the set of stored keys.  Total mass must not exceed 1.
    """

    __slots__ = ("_entries", "_mass", "_key")

    def __init__(self, entries: Mapping[Outcome, Fraction] | Iterable[tuple[Outcome, Fraction]]):
        items = entries.items() if isinstance(entries, Mapping) else entries
        store: dict = {}
        for x, w in items:
            w = as_weight(w)
            if w == 0:
                continue
            if w < 0 or w > 1:
                raise InvalidSubdistribution(f"weight {w} for {x!r} outside (0, 1]")
            outcome_key(x)  # validates the outcome shape
            if x in store:
                raise InvalidSubdistribution(f"duplicate outcome {x!r}")
            store[x] = w
        mass = sum(store.values(), ZERO)
        if mass > 1:
            raise InvalidSubdistribution(f"total mass {mass} exceeds 1")
        self._entries = store
        self._mass = mass
        self._key = tuple(sorted(store.items(), key=lambda kv: outcome_key(kv[0])))

    @property
    def mass(self) -> Fraction:
        return self._mass

    def support(self) -> list:
        return [x for x, _ in self._key]

    def weight(self, x: Outcome) -> Fraction:
        return self._entries.get(x, ZERO)

    def items(self) -> tuple:
        """Entries in canonical outcome order."""
        return self._key

    def is_zero(self) -> bool:
        return not self._entries

    def is_distribution(self) -> bool:
        return self._mass == 1

    def scaled(self, factor: Fraction) -> "Subdist":
        factor = as_weight(factor) if factor != 0 else ZERO
        return Subdist({x: w * factor for x, w in self._entries.items()})

    def __rmul__(self, factor) -> "Subdist":
        return self.scaled(Fraction(factor))

    def __add__(self, other: "Subdist") -> "Subdist":
        merged = dict(self._entries)
        for x, w in other._entries.items():
            merged[x] = merged.get(x, ZERO) + w
        return Subdist(merged)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subdist) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return ket(self)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, x: Outcome) -> bool:
        return x in self._entries


Channel = Union[Mapping[Outcome, Subdist], Callable[[Outcome], Subdist]]


def zero() -> Subdist:
    return Subdist({})


def dirac(x: Outcome) -> Subdist:
    """Point mass 1|x>."""
    return Subdist({x: ONE})


def uniform(xs: Iterable[Outcome]) -> Subdist:
    """Equal weight 1/n on each of n distinct outcomes."""
    values = list(xs)
    if not values:
        raise EmptySupport("uniform over the empty set")
    if len(set(values)) != len(values):
        raise InvalidSubdistribution("uniform requires distinct outcomes")
    w = Fraction(1, len(values))
    return Subdist({x: w for x in values})


def tensor(sigma: Subdist, rho: Subdist) -> Subdist:
    """Parallel product; outcome tuples concatenate flat.

    Non-tuple outcomes act as 1-tuples and a resulting 1-tuple collapses
    back to its element, so `dirac(())` is a two-sided unit.
    """
    out: dict = {}
    for x, w in sigma.items():
        for y, v in rho.items():
            joint = _unflat(_flat(x) + _flat(y))
            out[joint] = out.get(joint, ZERO) + w * v
    return Subdist(out)


def restrict(sigma: Subdist, u: Callable[[Outcome], bool]) -> Subdist:
    """Keep only the monomials satisfying the predicate; weights unchanged."""
    kept = {}
    for x, w in sigma.items():
        try:
            holds = u(x)
        except PredicateTypeError:
            raise
        except Exception as exc:
            raise PredicateTypeError(f"predicate failed on {x!r}: {exc}") from exc
        if not isinstance(holds, bool):
            raise PredicateTypeError(f"predicate returned non-boolean on {x!r}")
        if holds:
            kept[x] = w
    return Subdist(kept)


def rescale(sigma: Subdist):
    """Split off the validity: Failure on zero, else (mass, mass-1 posterior)."""
    if sigma.is_zero():
        return FAILURE
    v = sigma.mass
    posterior = Subdist({x: w / v for x, w in sigma.items()})
    return v, posterior


def _apply_channel(f: Channel, x: Outcome) -> Subdist:
    if callable(f):
        result = f(x)
    else:
        try:
            result = f[x]
        except KeyError:
            raise DomainError(f"outcome {x!r} outside channel domain") from None
    if not isinstance(result, Subdist):
        raise DomainError(f"channel produced non-subdistribution for {x!r}")
    return result


def kleisli_extend(f: Channel, sigma: Subdist) -> Subdist:
    """Linear extension of a channel: sum of r_i * f(x_i) over the support."""
    acc: dict = {}
    for x, w in sigma.items():
        for y, v in _apply_channel(f, x).items():
            acc[y] = acc.get(y, ZERO) + w * v
    return Subdist(acc)


def kleisli_compose(f: Mapping[Outcome, Subdist], g: Channel) -> dict:
    """Sequential composition of channels: x -> extension of g over f(x)."""
    return {x: kleisli_extend(g, fx) for x, fx in f.items()}


def normalize_channel(f: Mapping[Outcome, Subdist]) -> dict:
    """Rescale each output to mass 1; inputs with zero mass map to zero."""
    out = {}
    for x, fx in f.items():
        if fx.is_zero():
            out[x] = fx
        else:
            out[x] = fx.scaled(1 / fx.mass)
    return out


def expected_value(d: Subdist) -> Fraction:
    """Weighted sum of integer outcomes."""
    total = ZERO
    for x, w in d.items():
        if isinstance(x, bool) or not isinstance(x, int):
            raise NonNumericOutcome(f"outcome {x!r} is not an integer")
        total += w * x
    return total


def ket(sigma: Subdist) -> str:
    """Render as a formal sum, e.g. ``1/3|M> + 2/3|R>``; zero renders as ``0``."""
    if sigma.is_zero():
        return "0"
    parts = [f"{render_weight(w)}|{render_outcome(x)}>" for x, w in sigma.items()]
    return " + ".join(parts)
