"""Walk counts on tori and on the square lattice, and walk generating functions.

Counts are Python ints. Torus counts come from eigenvalue power sums that are
rounded back to integers; the rounding residual is checked so that floating
cancellation at large walk lengths is reported instead of silently returned.
"""

from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .spectral import Spectrum, torus_eigenbasis, torus_eigenvalues
from .topology import Graph, TorusSpec, coord_map

__all__ = [
    "ROUNDING_GUARD",
    "POLE_TOL",
    "WalkPrecisionError",
    "PoleError",
    "WalkCount",
    "ResolventEntry",
    "SeriesValue",
    "torus_closed_walks",
    "torus_walks_between",
    "exact_walk_counts",
    "lattice_closed_walks",
    "lattice_closed_walks_multinomial",
    "lattice_walks_to",
    "lattice_walks_between_torus_nodes",
    "resolvent_entry",
    "torus_resolvent_diagonal",
    "wgf_series",
]

ROUNDING_GUARD = 1e-6
POLE_TOL = 1e-9


class WalkPrecisionError(ArithmeticError):
    """Floating power sum is too far from an integer to trust."""


class PoleError(ArithmeticError):
    """Evaluation point is (numerically) an eigenvalue."""


@dataclass(frozen=True)
class WalkCount:
    length: int
    count: int
    parity_mismatch: bool = False


@dataclass(frozen=True)
class ResolventEntry:
    i: int
    j: int
    x: float
    value: float


@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail_bound: float


def _round_count(total: float, length: int, scale: float) -> WalkCount:
    count = round(total)
    residual = abs(total - count)
    # Rounding error of a sum of l-th powers grows like l * eps * scale; once that
    # reaches order one the residual test is meaningless (every large float is integral).
    error = (length + 1) * 8 * sys.float_info.epsilon * scale
    if residual > ROUNDING_GUARD or error > 0.25:
        raise WalkPrecisionError(
            f"power sum {total!r} is {residual:.3g} from an integer at length {length}; "
            "use exact_walk_counts instead"
        )
    return WalkCount(length, int(count))


def _check_length(length: int) -> None:
    if length < 0:
        raise ValueError(f"walk length must be >= 0, got {length}")


def torus_closed_walks(spec: TorusSpec, length: int) -> WalkCount:
    """Closed walks of ``length`` steps from any fixed node: ``sum(lambda**l) / n``."""
    _check_length(length)
    lam = torus_eigenvalues(spec).eigenvalues
    return _round_count(math.fsum((lam**length).tolist()) / spec.n, length, spec.degree**length)


def torus_walks_between(spec: TorusSpec, i: int, j: int, length: int) -> WalkCount:
    """``(A**l)[i, j]`` as ``sum_theta u_theta(i) theta**l u_theta(j)`` over the eigenbasis."""
    _check_length(length)
    for u in (i, j):
        coord_map(spec, u)
    basis = torus_eigenbasis(spec)
    terms = basis.basis[i] * basis.basis[j] * basis.eigenvalues**length
    return _round_count(math.fsum(terms.tolist()), length, spec.degree**length)


def exact_walk_counts(g: Graph, source: int, max_length: int) -> list[list[int]]:
    """Exact counts of walks from ``source`` to every node, for lengths 0..max_length.

    Integer dynamic programming over the adjacency lists; no floating point.
    """
    counts = [0] * g.n
    counts[source] = 1
    out = [counts]
    for _ in range(max_length):
        counts = [sum(counts[v] for v in g.adjacency[u]) for u in range(g.n)]
        out.append(counts)
    return out


def lattice_closed_walks(half_length: int) -> WalkCount:
    """Closed walks of ``2 * half_length`` steps on Z^2, ``binom(2l, l)**2``."""
    _check_length(half_length)
    return WalkCount(2 * half_length, math.comb(2 * half_length, half_length) ** 2)


def lattice_closed_walks_multinomial(half_length: int) -> int:
    k = half_length
    f = math.factorial
    return sum(f(2 * k) // (f(i) * f(i) * f(k - i) * f(k - i)) for i in range(k + 1))


def lattice_walks_to(a: int, b: int, length: int) -> WalkCount:
    """Number of ``length``-step walks on Z^2 from the origin to ``(a, b)``.

    Sums the multinomial ``l! / (nU! nD! nR! nL!)`` over the number of up
    steps ``nU = i``, with ``nD = i - b``, ``nR = (l + a + b)/2 - i`` and
    ``nL = (l + b - a)/2 - i``. Terms with a negative step count are skipped.
    """
    _check_length(length)
    a, b = abs(a), abs(b)
    if (length + a + b) % 2:
        return WalkCount(length, 0, parity_mismatch=True)
    f = math.factorial
    right_plus = (length + a + b) // 2
    left_plus = (length + b - a) // 2
    total = 0
    for i in range(b, b + (length - b) // 2 + 1):
        steps = (i, i - b, right_plus - i, left_plus - i)
        if min(steps) < 0:
            continue
        total += f(length) // math.prod(f(s) for s in steps)
    return WalkCount(length, total)


def lattice_walks_between_torus_nodes(spec: TorusSpec, i: int, j: int, length: int) -> WalkCount:
    """Lattice lower bound for torus walks between ``i`` and ``j`` (2-D only)."""
    if spec.d != 2:
        raise ValueError("the lattice mapping is defined for 2-D tori only")
    xi, yi = coord_map(spec, i)
    xj, yj = coord_map(spec, j)
    return lattice_walks_to(xj - xi, yj - yi, length)


def resolvent_entry(spectrum: Spectrum, i: int, j: int, x: float) -> ResolventEntry:
    """``[(xI - A)^-1]_{ij}`` from an orthonormal eigenbasis."""
    if spectrum.basis is None:
        raise ValueError("resolvent_entry needs a spectrum with an eigenbasis")
    gaps = x - spectrum.eigenvalues
    if np.min(np.abs(gaps)) <= POLE_TOL:
        raise PoleError(f"x={x!r} lies on the spectrum")
    terms = spectrum.basis[i] * spectrum.basis[j] / gaps
    return ResolventEntry(i, j, x, math.fsum(terms.tolist()))


def torus_resolvent_diagonal(spec: TorusSpec, x: float) -> float:
    """Diagonal resolvent entry of a torus, ``sum(1 / (x - lambda)) / n`` for every node."""
    gaps = x - torus_eigenvalues(spec).eigenvalues
    if np.min(np.abs(gaps)) <= POLE_TOL:
        raise PoleError(f"x={x!r} lies on the spectrum")
    return math.fsum((1.0 / gaps).tolist()) / spec.n


def wgf_series(spec: TorusSpec, i: int, j: int, x: float, terms: int) -> SeriesValue:
    """Partial sum ``sum_{l <= L} x**l (A**l)[i, j]`` of the walk generating function.

    The tail bound ``(2d|x|)**(L+1) / (1 - 2d|x|)`` is infinite outside the
    disc of convergence ``|x| < 1/(2d)``, where a warning is also issued.
    """
    if terms < 0:
        raise ValueError("truncation length must be >= 0")
    basis = torus_eigenbasis(spec)
    weights = basis.basis[i] * basis.basis[j]
    ratio = spec.degree * abs(x)
    if ratio >= 1.0:
        warnings.warn(
            f"walk generating function diverges at |x|={abs(x)} >= 1/{spec.degree}",
            RuntimeWarning,
            stacklevel=2,
        )
        tail = math.inf
    else:
        tail = ratio ** (terms + 1) / (1.0 - ratio)
    powers = np.ones_like(basis.eigenvalues)
    total = []
    for _ in range(terms + 1):
        total.append(math.fsum((weights * powers).tolist()))
        powers = powers * (x * basis.eigenvalues)
    return SeriesValue(math.fsum(total), tail)
