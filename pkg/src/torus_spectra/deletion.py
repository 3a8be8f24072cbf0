"""Characteristic polynomials and spectral radii of tori with nodes or an edge removed.

Every identity is evaluated pointwise at real ``x`` and combined in log space:

* one node:  ``phi(G - i) = R_ii(x) phi(G)``
* node set:  ``phi(G - S) = det(R_SS(x)) phi(G)``
* two nodes: ``phi(G - ij) = phi(G - i) phi(G - j) / phi(G) - phi(G) R_ij(x)**2``
* one edge:  ``phi(G - e) = phi(G) - phi(G - ij) + 2 sqrt(phi(G - i) phi(G - j) - phi(G) phi(G - ij))``

where ``R(x) = (xI - A)^-1`` is the torus resolvent. The largest root of the
deleted polynomial is then located by a downward scan from ``2d`` followed by
bisection.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from functools import partial

import numpy as np

from ._concurrency import pmap
from .spectral import (
    ORACLE_MAX_NODES,
    PolyEval,
    charpoly_eval_torus,
    dense_spectrum,
    torus_eigenbasis,
    torus_eigenvalues,
)
from .topology import Graph, TorusSpec, build_torus, coord_index, coord_map, delete_edge, delete_nodes
from .walks import POLE_TOL, PoleError, torus_resolvent_diagonal

__all__ = [
    "MAX_SET_SIZE",
    "DeletionError",
    "Removal",
    "DeletionResult",
    "resolvent_block",
    "charpoly_minus_node",
    "charpoly_minus_set",
    "charpoly_minus_two",
    "charpoly_minus_edge",
    "edge_radicand",
    "largest_root",
    "spectral_radius_after_deletion",
    "deleted_graph",
    "one_node_reduction_sweep",
    "two_node_reduction_map",
    "central_node",
]

MAX_SET_SIZE = 8
RADICAND_TOL = 1e-9
SCAN_STEP = 0.05
BISECTION_TOL = 1e-10


class DeletionError(ValueError):
    pass


@dataclass(frozen=True)
class Removal:
    """What to delete from a torus: one node, a node set, or an edge."""

    kind: str
    items: tuple[int, ...]

    @classmethod
    def node(cls, i: int) -> Removal:
        return cls("node", (int(i),))

    @classmethod
    def nodes(cls, s: Iterable[int]) -> Removal:
        items = tuple(sorted({int(u) for u in s}))
        if not items:
            raise DeletionError("empty node set")
        return cls("node" if len(items) == 1 else "nodes", items)

    @classmethod
    def edge(cls, i: int, j: int) -> Removal:
        return cls("edge", (min(i, j), max(i, j)))

    @classmethod
    def coerce(cls, removal: Removal | int | Iterable[int]) -> Removal:
        if isinstance(removal, Removal):
            return removal
        if isinstance(removal, (int, np.integer)):
            return cls.node(int(removal))
        return cls.nodes(removal)

    def describe(self) -> str:
        sep = ":" if self.kind == "edge" else ";"
        return f"{self.kind}:{sep.join(map(str, self.items))}"


@dataclass(frozen=True)
class DeletionResult:
    target: Removal
    charpoly_at: Callable[[float], PolyEval]
    spectral_radius: float
    oracle_radius: float
    discrepancy: float
    intact_radius: float

    @property
    def reduction(self) -> float:
        return self.intact_radius - self.spectral_radius


def _check_nodes(spec: TorusSpec, nodes: Iterable[int]) -> None:
    for u in nodes:
        if not 0 <= u < spec.n:
            raise DeletionError(f"node {u} out of range [0, {spec.n})")


def resolvent_block(spec: TorusSpec, nodes: Iterable[int], x: float) -> np.ndarray:
    """``[(xI - A)^-1]`` restricted to rows and columns ``nodes``."""
    nodes = list(nodes)
    _check_nodes(spec, nodes)
    basis = torus_eigenbasis(spec)
    gaps = x - basis.eigenvalues
    if np.min(np.abs(gaps)) <= POLE_TOL:
        raise PoleError(f"x={x!r} lies on the torus spectrum")
    rows = basis.basis[nodes]
    return (rows / gaps) @ rows.T


def charpoly_minus_node(spec: TorusSpec, i: int, x: float) -> PolyEval:
    _check_nodes(spec, [i])
    return charpoly_eval_torus(spec, x) * torus_resolvent_diagonal(spec, x)


def charpoly_minus_set(spec: TorusSpec, s: Iterable[int], x: float) -> PolyEval:
    nodes = sorted(set(s))
    if not nodes:
        raise DeletionError("empty node set")
    if len(nodes) > MAX_SET_SIZE:
        raise DeletionError(
            f"determinant identity limited to {MAX_SET_SIZE} nodes; use the dense oracle"
        )
    sign, logdet = np.linalg.slogdet(resolvent_block(spec, nodes, x))
    if sign == 0:
        return PolyEval.zero()
    return charpoly_eval_torus(spec, x) * PolyEval(int(sign), float(logdet))


def charpoly_minus_two(spec: TorusSpec, i: int, j: int, x: float) -> PolyEval:
    if i == j:
        raise DeletionError("two-node removal needs distinct nodes")
    r = resolvent_block(spec, [i, j], x)
    phi = charpoly_eval_torus(spec, x)
    phi_i = phi * r[0, 0]
    phi_j = phi * r[1, 1]
    return phi_i * phi_j / phi - phi * (r[0, 1] ** 2)


def _is_torus_edge(spec: TorusSpec, i: int, j: int) -> bool:
    ci, cj = coord_map(spec, i), coord_map(spec, j)
    diffs = [(a - b) % spec.m for a, b in zip(ci, cj) if a != b]
    return len(diffs) == 1 and diffs[0] in (1, spec.m - 1)


def edge_radicand(spec: TorusSpec, i: int, j: int, x: float) -> PolyEval:
    """``phi(G - i) phi(G - j) - phi(G) phi(G - ij)``, which equals ``(phi(G) R_ij)**2``."""
    phi = charpoly_eval_torus(spec, x)
    phi_i = charpoly_minus_node(spec, i, x)
    phi_j = charpoly_minus_node(spec, j, x)
    return phi_i * phi_j - phi * charpoly_minus_two(spec, i, j, x)


def charpoly_minus_edge(spec: TorusSpec, i: int, j: int, x: float) -> PolyEval:
    """Characteristic polynomial of the torus with edge ``{i, j}`` removed.

    The square root stands for ``phi(G) R_ij(x)`` and is given that sign. It
    is positive for every ``x`` above the spectral radius, where both factors
    are; carrying the sign keeps the evaluator valid below it for root finding.
    """
    _check_nodes(spec, [i, j])
    if not _is_torus_edge(spec, i, j):
        raise DeletionError(f"{{{i}, {j}}} is not an edge of the torus")
    phi = charpoly_eval_torus(spec, x)
    phi_ij = charpoly_minus_two(spec, i, j, x)
    radicand = edge_radicand(spec, i, j, x)
    if radicand.sign < 0:
        scale = (charpoly_minus_node(spec, i, x) * charpoly_minus_node(spec, j, x)).log_magnitude
        if radicand.log_magnitude - scale > math.log(RADICAND_TOL):
            raise DeletionError(f"negative radicand at x={x!r}; outside the valid region")
        radicand = PolyEval.zero()
    root = radicand.sqrt()
    if phi.sign * np.sign(resolvent_block(spec, [i, j], x)[0, 1]) < 0:
        root = -root
    return phi - phi_ij + root * 2.0


def _evaluator(spec: TorusSpec, removal: Removal) -> Callable[[float], PolyEval]:
    items = removal.items
    if removal.kind == "node":
        return partial(charpoly_minus_node, spec, items[0])
    if removal.kind == "nodes" and len(items) == 2:
        return partial(charpoly_minus_two, spec, items[0], items[1])
    if removal.kind == "nodes":
        return partial(charpoly_minus_set, spec, items)
    if removal.kind == "edge":
        return partial(charpoly_minus_edge, spec, items[0], items[1])
    raise DeletionError(f"unknown removal kind {removal.kind!r}")


def largest_root(
    evaluate: Callable[[float], PolyEval],
    top: float,
    poles: np.ndarray,
    step: float = SCAN_STEP,
    floor: float | None = None,
    tol: float = BISECTION_TOL,
) -> float:
    """Largest sign change of ``evaluate`` below ``top``.

    Scans downward in steps of ``step``, nudging any sample that falls within
    ``1e-7`` of a pole of the resolvent, then bisects the first bracket to
    width ``tol``. A sample with sign 0 is returned as the root.
    """

    def safe(x: float) -> float:
        near = np.abs(poles - x) < 1e-7
        if near.any():
            x = float(poles[near][0]) - 1e-6
        return x

    floor = -top - 1.0 if floor is None else floor
    hi = safe(top)
    s_hi = evaluate(hi).sign
    if s_hi == 0:
        return hi
    lo = hi
    while True:
        lo = safe(lo - step)
        if lo < floor:
            raise DeletionError(f"no sign change found while scanning [{floor}, {top}]")
        s_lo = evaluate(lo).sign
        if s_lo == 0:
            return lo
        if s_lo != s_hi:
            break
        hi = lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        near = np.abs(poles - mid) <= 2 * POLE_TOL
        if near.any():
            mid += 4 * POLE_TOL if mid + 4 * POLE_TOL < hi else -4 * POLE_TOL
        s_mid = evaluate(mid).sign
        if s_mid == 0:
            return mid
        if s_mid == s_hi:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def deleted_graph(spec: TorusSpec, removal: Removal) -> Graph:
    g = build_torus(spec)
    if removal.kind == "edge":
        return delete_edge(g, *removal.items)
    return delete_nodes(g, removal.items)


def spectral_radius_after_deletion(
    spec: TorusSpec,
    removal: Removal | int | Iterable[int],
    tol: float = BISECTION_TOL,
    oracle: bool = True,
) -> DeletionResult:
    """Spectral radius of the torus after ``removal``, with a dense cross-check.

    The oracle runs only when ``oracle`` is set and the deleted graph has at
    most ``ORACLE_MAX_NODES`` nodes; otherwise ``oracle_radius`` and
    ``discrepancy`` are NaN.
    """
    removal = Removal.coerce(removal)
    _check_nodes(spec, removal.items)
    if removal.kind != "edge" and len(removal.items) >= spec.n:
        raise DeletionError("deletion leaves an empty graph")
    evaluate = _evaluator(spec, removal)
    poles = torus_eigenvalues(spec).distinct()
    gap = spec.degree - poles[1]
    step = min(SCAN_STEP, gap / 16.0)
    rho = largest_root(evaluate, spec.degree - 1e-9, poles, step=step, tol=tol)

    oracle_rho = discrepancy = math.nan
    remaining = spec.n - (0 if removal.kind == "edge" else len(removal.items))
    if oracle and remaining <= ORACLE_MAX_NODES:
        oracle_rho = dense_spectrum(deleted_graph(spec, removal)).radius
        discrepancy = abs(rho - oracle_rho)
    return DeletionResult(removal, evaluate, rho, oracle_rho, discrepancy, float(spec.degree))


# -- position sweeps ---------------------------------------------------------


def central_node(spec: TorusSpec) -> int:
    return coord_index(spec, [spec.m // 2] * spec.d)


def one_node_reduction_sweep(lens: Iterable[int], d: int = 2, oracle: bool = True) -> list[dict]:
    """Spectral-radius drop from deleting one node, for each torus side length."""

    def row(m: int) -> dict:
        spec = TorusSpec(d, m)
        res = spectral_radius_after_deletion(spec, Removal.node(0), oracle=oracle)
        return {
            "m": m,
            "rho_analytic": res.spectral_radius,
            "rho_oracle": res.oracle_radius,
            "rho_reduction": res.reduction,
            "discrepancy": res.discrepancy,
        }

    return pmap(row, lens)


def two_node_reduction_map(
    spec: TorusSpec, first: int | None = None, oracle: bool = True
) -> list[dict]:
    """Spectral-radius drop from deleting ``first`` plus each other node in turn."""
    first = central_node(spec) if first is None else first

    def row(j: int) -> dict:
        coords = coord_map(spec, j)
        out = {"node": j, **{f"c{k}": c for k, c in enumerate(coords)}}
        if j == first:
            return {**out, "rho_analytic": math.nan, "rho_oracle": math.nan,
                    "rho_reduction": math.nan, "discrepancy": math.nan}
        res = spectral_radius_after_deletion(spec, Removal.nodes([first, j]), oracle=oracle)
        return {
            **out,
            "rho_analytic": res.spectral_radius,
            "rho_oracle": res.oracle_radius,
            "rho_reduction": res.reduction,
            "discrepancy": res.discrepancy,
        }

    return pmap(row, range(spec.n))
