"""Grids, rings, d-dimensional tori and their node/edge-deleted variants.

Nodes are 0-based and laid out row-major with axis 0 varying fastest, so on a
2-D torus of side ``m`` node ``u`` sits at ``(u % m, u // m)``.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "TopologyError",
    "TorusSpec",
    "Graph",
    "build_torus",
    "build_grid",
    "delete_nodes",
    "delete_edge",
    "add_edge",
    "coord_map",
    "coord_index",
    "read_edgelist",
    "write_edgelist",
    "format_edgelist",
]


class TopologyError(ValueError):
    """Degenerate or inconsistent topology request."""


@dataclass(frozen=True)
class TorusSpec:
    """Side length ``m`` and dimension ``d`` of a torus, without building it."""

    d: int
    m: int

    def __post_init__(self):
        if self.d < 1:
            raise TopologyError(f"dimension must be >= 1, got d={self.d}")
        if self.m < 3:
            raise TopologyError(
                f"torus side length must be >= 3 (m={self.m} creates self-loops "
                "or parallel edges)"
            )

    @property
    def n(self) -> int:
        return self.m**self.d

    @property
    def degree(self) -> int:
        return 2 * self.d


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph stored as sorted adjacency tuples.

    Attributes
    ----------
    adjacency : tuple of tuple of int
        ``adjacency[u]`` lists the neighbours of ``u`` in increasing order.
    index_map : dict, optional
        For graphs produced by :func:`delete_nodes`, maps each surviving
        original index to its new compact index.
    """

    adjacency: tuple[tuple[int, ...], ...]
    index_map: dict[int, int] | None = field(default=None, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Graph:
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise TopologyError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise TopologyError(f"self-loop at node {i}")
            nbrs[i].add(j)
            nbrs[j].add(i)
        return cls(tuple(tuple(sorted(s)) for s in nbrs))

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def num_edges(self) -> int:
        return int(self.degrees().sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nb in enumerate(self.adjacency) for j in nb if i < j]

    def has_edge(self, i: int, j: int) -> bool:
        if not (0 <= i < self.n and 0 <= j < self.n):
            return False
        nb = self.adjacency[i]
        k = int(np.searchsorted(nb, j))
        return k < len(nb) and nb[k] == j

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges():
            a[i, j] = a[j, i] = 1.0
        return a

    def padded_neighbors(self) -> np.ndarray:
        """Neighbour table padded with the sentinel index ``n``.

        Shape ``(n, max_degree)``; lets vectorised code gather from a length
        ``n + 1`` array whose last slot holds a neutral value.
        """
        width = max((len(a) for a in self.adjacency), default=0)
        out = np.full((self.n, width), self.n, dtype=np.int64)
        for i, nb in enumerate(self.adjacency):
            out[i, : len(nb)] = nb
        return out

    def matvec(self, v: np.ndarray) -> np.ndarray:
        pad = np.append(v, 0.0)
        nbr = self.padded_neighbors()
        return pad[nbr].sum(axis=1) if nbr.shape[1] else np.zeros_like(v)


def coord_map(spec: TorusSpec, u: int) -> tuple[int, ...]:
    if not 0 <= u < spec.n:
        raise IndexError(f"node {u} out of range [0, {spec.n})")
    coords = []
    for _ in range(spec.d):
        u, c = divmod(u, spec.m)
        coords.append(c)
    return tuple(coords)


def coord_index(spec: TorusSpec, coords: Iterable[int]) -> int:
    coords = tuple(coords)
    if len(coords) != spec.d or any(not 0 <= c < spec.m for c in coords):
        raise IndexError(f"coordinates {coords} invalid for {spec}")
    u = 0
    for c in reversed(coords):
        u = u * spec.m + c
    return u


def _lattice_edges(d: int, m: int, wrap: bool) -> list[tuple[int, int]]:
    n = m**d
    idx = np.arange(n).reshape((m,) * d, order="F")
    edges = []
    for axis in range(d):
        shifted = np.roll(idx, -1, axis=axis)
        src, dst = idx, shifted
        if not wrap:
            keep = [slice(None)] * d
            keep[axis] = slice(0, m - 1)
            src, dst = idx[tuple(keep)], shifted[tuple(keep)]
        edges.extend(zip(src.ravel().tolist(), dst.ravel().tolist()))
    return edges


def build_torus(spec: TorusSpec) -> Graph:
    """2d-regular torus: ``u`` is joined to ``u +/- e_k (mod m)`` on every axis."""
    return Graph.from_edges(spec.n, _lattice_edges(spec.d, spec.m, wrap=True))


def build_grid(spec: TorusSpec | tuple[int, int]) -> Graph:
    """Open grid (no wraparound). Accepts ``(d, m)`` so that ``m = 2`` is allowed."""
    d, m = (spec.d, spec.m) if isinstance(spec, TorusSpec) else spec
    if d < 1 or m < 2:
        raise TopologyError(f"grid needs d >= 1 and m >= 2, got d={d}, m={m}")
    return Graph.from_edges(m**d, _lattice_edges(d, m, wrap=False))


def delete_nodes(g: Graph, s: Iterable[int]) -> Graph:
    """Induced subgraph on the nodes not in ``s``, reindexed compactly."""
    removed = set(s)
    bad = [u for u in removed if not 0 <= u < g.n]
    if bad:
        raise TopologyError(f"node(s) {sorted(bad)} out of range [0, {g.n})")
    keep = [u for u in range(g.n) if u not in removed]
    remap = {old: new for new, old in enumerate(keep)}
    adjacency = tuple(
        tuple(remap[v] for v in g.adjacency[u] if v in remap) for u in keep
    )
    return Graph(adjacency, index_map=remap)


def delete_edge(g: Graph, i: int, j: int) -> Graph:
    if not g.has_edge(i, j):
        raise TopologyError(f"edge {{{i}, {j}}} not present")
    adj = list(g.adjacency)
    adj[i] = tuple(v for v in adj[i] if v != j)
    adj[j] = tuple(v for v in adj[j] if v != i)
    return Graph(tuple(adj), index_map=g.index_map)


def add_edge(g: Graph, i: int, j: int) -> Graph:
    if i == j or not (0 <= i < g.n and 0 <= j < g.n):
        raise TopologyError(f"cannot add edge {{{i}, {j}}}")
    if g.has_edge(i, j):
        raise TopologyError(f"edge {{{i}, {j}}} already present")
    adj = list(g.adjacency)
    adj[i] = tuple(sorted(adj[i] + (j,)))
    adj[j] = tuple(sorted(adj[j] + (i,)))
    return Graph(tuple(adj), index_map=g.index_map)


# -- edge-list text format: "n <count>" then sorted "i j" lines with i < j ----


def format_edgelist(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{i} {j}" for i, j in sorted(g.edges()))
    return "\n".join(lines) + "\n"


def write_edgelist(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edgelist(g), newline="\n")


def read_edgelist(path: str | Path) -> Graph:
    text = Path(path).read_text()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n "):
        raise TopologyError("edge list must start with a 'n <count>' header")
    try:
        n = int(lines[0].split()[1])
        edges = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise TopologyError(f"malformed edge list: {exc}") from None
    for e in edges:
        if len(e) != 2:
            raise TopologyError(f"malformed edge line: {e}")
        if e[0] == e[1]:
            raise TopologyError(f"self-loop at node {e[0]}")
    seen = {tuple(sorted(e)) for e in edges}
    if len(seen) != len(edges):
        raise TopologyError("duplicate edges in edge list")
    return Graph.from_edges(n, edges)
