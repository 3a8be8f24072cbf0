"""Adjacency spectra of tori and of arbitrary small graphs.

The torus spectrum is enumerated in closed form: eigenvalues are sums of ring
eigenvalues ``2 cos(2 pi i / m)`` over the ``d`` axes, and eigenvectors are
Kronecker products of the real sin/cos ring eigenvectors. Dense
``numpy.linalg`` routines serve as the brute-force oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .topology import Graph, TorusSpec

__all__ = [
    "MULTIPLICITY_TOL",
    "ZERO_TOL",
    "ORACLE_MAX_NODES",
    "POWER_SEED",
    "SpectralError",
    "Spectrum",
    "PolyEval",
    "ring_eigenvalues",
    "ring_eigenbasis",
    "torus_eigenvalues",
    "torus_eigenbasis",
    "dense_spectrum",
    "dense_charpoly",
    "spectral_radius_power",
    "degree_bounds",
    "charpoly_eval_torus",
    "laplacian_spectrum",
]

MULTIPLICITY_TOL = 1e-7
ZERO_TOL = 1e-12
ORACLE_MAX_NODES = 4000
POWER_SEED = 20240601


class SpectralError(RuntimeError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted in descending order, optionally with an eigenbasis.

    ``basis[:, k]`` is a unit eigenvector for ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def multiplicities(self, tol: float = MULTIPLICITY_TOL) -> list[tuple[float, int]]:
        """Cluster eigenvalues closer than ``tol`` and count each cluster."""
        out: list[tuple[float, int]] = []
        cluster: list[float] = []
        for lam in self.eigenvalues:
            if cluster and cluster[-1] - lam > tol:
                out.append((math.fsum(cluster) / len(cluster), len(cluster)))
                cluster = []
            cluster.append(float(lam))
        if cluster:
            out.append((math.fsum(cluster) / len(cluster), len(cluster)))
        return out

    def distinct(self, tol: float = MULTIPLICITY_TOL) -> np.ndarray:
        return np.array([v for v, _ in self.multiplicities(tol)])


def _sorted_spectrum(values: np.ndarray, basis: np.ndarray | None = None) -> Spectrum:
    order = np.argsort(-values, kind="stable")
    values = values[order]
    if basis is not None:
        basis = basis[:, order]
    return Spectrum(values, basis)


@dataclass(frozen=True)
class PolyEval:
    """A real number stored as sign and natural log of its magnitude."""

    sign: int
    log_magnitude: float

    @classmethod
    def from_value(cls, value: float) -> PolyEval:
        if value == 0:
            return cls(0, -math.inf)
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @classmethod
    def zero(cls) -> PolyEval:
        return cls(0, -math.inf)

    @property
    def value(self) -> float:
        """The plain float, or +/-inf when it overflows."""
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_magnitude)
        except OverflowError:
            return self.sign * math.inf

    @property
    def is_finite(self) -> bool:
        return self.sign == 0 or self.log_magnitude < 709.0

    def __mul__(self, other: PolyEval | float) -> PolyEval:
        if not isinstance(other, PolyEval):
            other = PolyEval.from_value(float(other))
        if self.sign == 0 or other.sign == 0:
            return PolyEval.zero()
        return PolyEval(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    __rmul__ = __mul__

    def __truediv__(self, other: PolyEval | float) -> PolyEval:
        if not isinstance(other, PolyEval):
            other = PolyEval.from_value(float(other))
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero PolyEval")
        if self.sign == 0:
            return PolyEval.zero()
        return PolyEval(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    def __neg__(self) -> PolyEval:
        return PolyEval(-self.sign, self.log_magnitude)

    def __add__(self, other: PolyEval) -> PolyEval:
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        big, small = (self, other) if self.log_magnitude >= other.log_magnitude else (other, self)
        ratio = math.exp(small.log_magnitude - big.log_magnitude)
        if big.sign == small.sign:
            return PolyEval(big.sign, big.log_magnitude + math.log1p(ratio))
        if ratio == 1.0:
            return PolyEval.zero()
        return PolyEval(big.sign, big.log_magnitude + math.log1p(-ratio))

    def __sub__(self, other: PolyEval) -> PolyEval:
        return self + (-other)

    def sqrt(self) -> PolyEval:
        if self.sign < 0:
            raise ValueError("square root of a negative PolyEval")
        if self.sign == 0:
            return self
        return PolyEval(1, 0.5 * self.log_magnitude)

    def rel_diff(self, other: PolyEval) -> float:
        """``|self - other| / |other|``, computed without leaving log space."""
        if other.sign == 0:
            return 0.0 if self.sign == 0 else math.inf
        d = self - other
        if d.sign == 0:
            return 0.0
        return math.exp(d.log_magnitude - other.log_magnitude)


# -- closed-form torus spectra ------------------------------------------------


def ring_eigenvalues(m: int) -> np.ndarray:
    """Adjacency eigenvalues ``2 cos(2 pi i / m)`` of the ring, ``i = 1..m``."""
    i = np.arange(1, m + 1)
    return 2.0 * np.cos(2.0 * np.pi * i / m)


def ring_eigenbasis(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Real orthonormal ring eigenvectors built from ``sin``/``cos`` of ``2 pi k u / m``.

    Returns ``(values, vectors)`` with one column per eigenvalue. The constant
    vector carries eigenvalue 2; for even ``m`` the alternating ``cos(pi u)``
    vector carries -2 and its vanishing sine partner is dropped.
    """
    u = np.arange(m)
    cols = [np.full(m, 1.0 / math.sqrt(m))]
    vals = [2.0]
    for k in range(1, (m - 1) // 2 + 1):
        theta = 2.0 * np.pi * k * u / m
        lam = 2.0 * math.cos(2.0 * math.pi * k / m)
        cols.append(np.cos(theta) * math.sqrt(2.0 / m))
        cols.append(np.sin(theta) * math.sqrt(2.0 / m))
        vals.extend([lam, lam])
    if m % 2 == 0:
        cols.append(np.cos(np.pi * u) / math.sqrt(m))
        vals.append(-2.0)
    return np.array(vals), np.column_stack(cols)


def _kron_sum(values: np.ndarray, d: int) -> np.ndarray:
    # Entry order matches np.kron(V, ..., V) columns: slowest axis first.
    total = np.zeros(1)
    for _ in range(d):
        total = (total[:, None] + values[None, :]).ravel()
    return total


def torus_eigenvalues(spec: TorusSpec) -> Spectrum:
    return _sorted_spectrum(_kron_sum(ring_eigenvalues(spec.m), spec.d))


@lru_cache(maxsize=16)
def torus_eigenbasis(spec: TorusSpec) -> Spectrum:
    """Orthonormal eigenbasis as the ``d``-fold Kronecker power of the ring basis."""
    if spec.n > ORACLE_MAX_NODES:
        raise SpectralError(f"eigenbasis for n={spec.n} exceeds {ORACLE_MAX_NODES} nodes")
    vals, vecs = ring_eigenbasis(spec.m)
    z = np.ones((1, 1))
    for _ in range(spec.d):
        z = np.kron(z, vecs)
    spectrum = _sorted_spectrum(_kron_sum(vals, spec.d), z)
    spectrum.eigenvalues.setflags(write=False)
    spectrum.basis.setflags(write=False)
    return spectrum


def laplacian_spectrum(spec: TorusSpec) -> Spectrum:
    """Laplacian eigenvalues ``2d - lambda``; the smallest is 0."""
    adj = torus_eigenvalues(spec).eigenvalues
    return Spectrum(np.sort(spec.degree - adj))


# -- dense oracle -------------------------------------------------------------


def _guard(n: int) -> None:
    if n > ORACLE_MAX_NODES:
        raise SpectralError(f"dense oracle limited to {ORACLE_MAX_NODES} nodes, got {n}")


def dense_spectrum(g: Graph, with_basis: bool = False) -> Spectrum:
    _guard(g.n)
    a = g.to_dense()
    if with_basis:
        w, v = np.linalg.eigh(a)
        return _sorted_spectrum(w, v)
    return _sorted_spectrum(np.linalg.eigvalsh(a))


def dense_charpoly(g: Graph, x: float) -> PolyEval:
    """``det(xI - A)`` by LU factorisation."""
    _guard(g.n)
    if g.n == 0:
        return PolyEval(1, 0.0)
    sign, logdet = np.linalg.slogdet(x * np.eye(g.n) - g.to_dense())
    if sign == 0:
        return PolyEval.zero()
    return PolyEval(int(sign), float(logdet))


# -- power iteration ----------------------------------------------------------


def spectral_radius_power(
    g: Graph,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    seed: int = POWER_SEED,
) -> float:
    """Largest adjacency eigenvalue by power iteration on ``A + max_deg * I``.

    The shift makes the matrix positive semidefinite, so the dominant
    eigenvalue is ``rho + max_deg`` even on bipartite graphs where ``+rho``
    and ``-rho`` would otherwise tie. Stops when the eigen-residual
    ``||Bv - mu v||`` drops below ``tol``.
    """
    if g.n == 0:
        raise SpectralError("spectral radius of an empty graph")
    shift = float(g.degrees().max())
    if shift == 0:
        return 0.0
    nbr = g.padded_neighbors()
    rng = np.random.default_rng(seed)
    v = rng.random(g.n) + 0.5
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = np.append(v, 0.0)[nbr].sum(axis=1) + shift * v
        mu = float(v @ w)
        if np.linalg.norm(w - mu * v) <= tol:
            return mu - shift
        v = w / np.linalg.norm(w)
    raise SpectralError(f"power iteration did not converge in {max_iter} iterations")


def degree_bounds(g: Graph) -> tuple[float, float]:
    """``(max(avg_deg, sqrt(max_deg)), max_deg)``, which bracket the spectral radius."""
    if g.n == 0:
        raise SpectralError("degree bounds of an empty graph")
    deg = g.degrees()
    dmax = float(deg.max())
    return max(float(deg.mean()), math.sqrt(dmax)), dmax


# -- characteristic polynomial ------------------------------------------------


def _log_product(factors: np.ndarray) -> PolyEval:
    if np.any(np.abs(factors) <= ZERO_TOL):
        return PolyEval.zero()
    sign = -1 if np.count_nonzero(factors < 0) % 2 else 1
    return PolyEval(sign, math.fsum(np.log(np.abs(factors)).tolist()))


def charpoly_eval_torus(spec: TorusSpec, x: float) -> PolyEval:
    """``prod (x - lambda)`` over the whole torus spectrum, in log space."""
    return _log_product(x - torus_eigenvalues(spec).eigenvalues)

