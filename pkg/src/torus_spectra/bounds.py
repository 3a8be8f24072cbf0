"""Lattice and Stirling lower bounds for the torus walk generating function.

For ``x > 4`` the chain

    (1/x)(4 pi / e^4) sum_{l>=1} (1/l) (4/x)^(2l)
        <= (1/x) sum_{l>=0} x^(-2l) binom(2l, l)^2
        <= [(xI - A)^-1]_ii   on any 2-D torus

holds term by term: Stirling bounds the central binomial, and every lattice
closed walk folds onto a torus closed walk.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

from .topology import TorusSpec, build_torus
from .walks import (
    WalkPrecisionError,
    exact_walk_counts,
    lattice_closed_walks,
    torus_closed_walks,
    torus_resolvent_diagonal,
)

__all__ = [
    "STIRLING_CONST",
    "DEFAULT_TERMS",
    "LowerBound",
    "BoundReport",
    "stirling_binomial_lower",
    "lattice_wgf_lower",
    "lattice_wgf_truncated",
    "bound_report",
    "compare_walks",
    "compare_walks_vs_m",
]

STIRLING_CONST = math.sqrt(4.0 * math.pi) / math.e**2
DEFAULT_TERMS = 200


@dataclass(frozen=True)
class LowerBound:
    """Truncated series value, its closed form, and the truncation tail bound."""

    truncated: float
    closed_form: float
    difference: float
    tail_bound: float


@dataclass(frozen=True)
class BoundReport:
    x: float
    exact_value: float
    lattice_value: float
    stirling_value: float
    lattice_tail: float
    stirling_tail: float

    @property
    def gaps(self) -> tuple[float, float]:
        return (self.exact_value - self.lattice_value, self.lattice_value - self.stirling_value)

    def chain_holds(self) -> bool:
        return (
            self.stirling_value <= self.lattice_value + self.lattice_tail
            and self.lattice_value <= self.exact_value
        )


def stirling_binomial_lower(half_length: int) -> float:
    """``sqrt(4 pi) / e^2 * 4^l / sqrt(l)``, a lower bound on ``binom(2l, l)``."""
    if half_length < 1:
        raise ValueError("Stirling bound needs l >= 1 (binom(0, 0) = 1 exactly)")
    return STIRLING_CONST * 4.0**half_length / math.sqrt(half_length)


def _check_x(x: float) -> float:
    if x <= 4.0:
        raise ValueError(f"lattice series diverges for x <= 4, got x={x}")
    return 16.0 / (x * x)


def lattice_wgf_lower(x: float, terms: int = DEFAULT_TERMS) -> LowerBound:
    """Stirling lower bound on the diagonal lattice resolvent at ``x``.

    The series starts at ``l = 1``; the closed form is
    ``(1/x)(4 pi / e^4)(-log(1 - 16/x^2))``.
    """
    r = _check_x(x)
    c = STIRLING_CONST**2 / x
    parts = [r**k / k for k in range(1, terms + 1)]
    truncated = c * math.fsum(parts)
    closed = c * -math.log1p(-r)
    tail = c * r ** (terms + 1) / ((terms + 1) * (1.0 - r))
    return LowerBound(truncated, closed, closed - truncated, tail)


def lattice_wgf_truncated(x: float, terms: int = DEFAULT_TERMS) -> tuple[float, float]:
    """``(1/x) sum_{l<=L} x^(-2l) binom(2l, l)^2`` and a bound on the omitted tail."""
    r = _check_x(x)
    # counts and powers both overflow floats long before the terms become negligible
    log_x2 = 2.0 * math.log(x)
    parts = [
        math.exp(math.log(lattice_closed_walks(k).count) - k * log_x2) for k in range(terms + 1)
    ]
    return math.fsum(parts) / x, r ** (terms + 1) / ((1.0 - r) * x)


def bound_report(spec: TorusSpec, x: float, terms: int = DEFAULT_TERMS) -> BoundReport:
    if spec.d != 2:
        raise ValueError("lattice bounds are defined for 2-D tori only")
    lattice, lattice_tail = lattice_wgf_truncated(x, terms)
    stirling = lattice_wgf_lower(x, terms)
    return BoundReport(
        x=x,
        exact_value=torus_resolvent_diagonal(spec, x),
        lattice_value=lattice,
        stirling_value=stirling.truncated,
        lattice_tail=lattice_tail,
        stirling_tail=stirling.tail_bound,
    )


def _percent(torus: int, lattice: int) -> float:
    return 100.0 * (torus - lattice) / torus if torus else 0.0


def _closed_walks(spec: TorusSpec, length: int) -> int:
    try:
        return torus_closed_walks(spec, length).count
    except WalkPrecisionError:
        return exact_walk_counts(build_torus(spec), 0, length)[length][0]


def compare_walks(m: int, max_length: int) -> list[dict]:
    """Closed-walk counts on the 2-D torus of side ``m`` against the lattice, even lengths.

    Percent difference is ``100 (torus - lattice) / torus``.
    """
    spec = TorusSpec(2, m)
    rows = []
    for length in range(0, max_length + 1, 2):
        torus = _closed_walks(spec, length)
        lattice = lattice_closed_walks(length // 2).count
        rows.append(
            {"ell": length, "torus": torus, "lattice": lattice,
             "percent_diff": _percent(torus, lattice)}
        )
    return rows


def compare_walks_vs_m(length: int, lens: Iterable[int]) -> list[dict]:
    """Closed walks of fixed even ``length`` on tori of varying side length."""
    if length % 2:
        raise ValueError("lattice closed walks exist only for even lengths")
    lattice = lattice_closed_walks(length // 2).count
    rows = []
    for m in lens:
        torus = _closed_walks(TorusSpec(2, m), length)
        rows.append(
            {"m": m, "torus": torus, "lattice": lattice,
             "percent_diff": _percent(torus, lattice)}
        )
    return rows
