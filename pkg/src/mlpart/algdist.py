"""Per-edge connection couplings from relaxed random test vectors.

Test vectors start uniform on [-1/2, 1/2] and are smoothed by a few sweeps of
Jacobi over-relaxation on the volume-normalized graph (the lazy random walk).
Edges whose endpoints keep disagreeing across all vectors get a large
coupling value; tightly knit endpoints converge to nearly equal entries and
get a small one.  Small coupling therefore means "strongly connected".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = [
    "RHO_FLOOR",
    "DegenerateVolumeError",
    "RelaxationParams",
    "algebraic_distances",
    "coupling_strength",
    "jor_sweep",
    "volume_normalized_weights",
]

# couplings are clamped to this floor wherever 1/rho is consumed
RHO_FLOOR = 1e-12


class DegenerateVolumeError(ValueError):
    """An edge endpoint has zero volume; normalization is undefined."""


@dataclass(frozen=True)
class RelaxationParams:
    """Relaxation settings; the defaults are the standard operating point."""

    alpha: float = 0.5
    num_vectors: int = 5
    num_sweeps: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.num_vectors < 1:
            raise ValueError("need at least one test vector")
        if self.num_sweeps < 0:
            raise ValueError("sweep count must be >= 0")


def volume_normalized_weights(g: Graph) -> np.ndarray:
    """Edge weights divided by the geometric mean of the endpoint volumes."""
    cu = g.node_weight[g.edge_u]
    cv = g.node_weight[g.edge_v]
    if np.any(cu <= 0) or np.any(cv <= 0):
        bad = int(np.flatnonzero((cu <= 0) | (cv <= 0))[0])
        raise DegenerateVolumeError(
            f"edge {bad} has an endpoint with zero volume; cannot normalize")
    return g.edge_weight / np.sqrt(cu * cv)


class _Relaxer:
    """Precomputed CSR expansion so repeated sweeps avoid rebuilding arrays."""

    def __init__(self, g: Graph, omega_tilde: np.ndarray, alpha: float):
        self.alpha = alpha
        self.rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
        self.cols = g.adj
        self.w = np.asarray(omega_tilde, dtype=np.float64)[g.adj_edge]
        self.degree = np.bincount(self.rows, weights=self.w, minlength=g.n)
        self.n = g.n

    def sweep(self, chi: np.ndarray) -> np.ndarray:
        wchi = np.bincount(self.rows, weights=self.w * chi[self.cols], minlength=self.n)
        avg = np.divide(wchi, self.degree, out=chi.astype(np.float64, copy=True),
                        where=self.degree > 0)
        return (1.0 - self.alpha) * chi + self.alpha * avg


def jor_sweep(g: Graph, omega_tilde: np.ndarray, chi: np.ndarray, alpha: float) -> np.ndarray:
    """One over-relaxation sweep; isolated nodes keep their value."""
    return _Relaxer(g, omega_tilde, alpha).sweep(np.asarray(chi, dtype=np.float64))


def algebraic_distances(g: Graph, params: RelaxationParams | None = None) -> np.ndarray:
    """Per-edge coupling: l2 distance of the relaxed test-vector entries.

    Vector r draws its own stream from ``params.seed + r`` so the vector
    count can change without reshuffling earlier vectors.  Output is raw
    (possibly zero); clamp through :func:`coupling_strength` before inverting.
    """
    if params is None:
        params = RelaxationParams()
    relaxer = _Relaxer(g, volume_normalized_weights(g), params.alpha)
    acc = np.zeros(g.m, dtype=np.float64)
    for r in range(params.num_vectors):
        rng = np.random.default_rng(params.seed + r)
        chi = rng.uniform(-0.5, 0.5, size=g.n)
        for _ in range(params.num_sweeps):
            chi = relaxer.sweep(chi)
        diff = chi[g.edge_u] - chi[g.edge_v]
        acc += diff * diff
    return np.sqrt(acc)


def coupling_strength(rho: np.ndarray) -> np.ndarray:
    """Inverse coupling 1/rho with the floor applied; defined on edges only."""
    return 1.0 / np.maximum(rho, RHO_FLOOR)
