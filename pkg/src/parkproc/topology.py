"""Finite graphs and walk kernels the parking process runs on.

Supported families are the unoriented/oriented d-dimensional torus (the
periodic box standing in for the infinite lattice), the 1D cycle, the
oriented 1D cycle (every edge pointing from right to left), and the finite
path with reflecting endpoints.  A topology exposes canonically ordered
out-neighbors with kernel weights, undirected shortest-path distances and
balls, and the kernel constants (max degree, minimum transition weight)
used by the small-density bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Family(Enum):
    UNORIENTED_TORUS = "unoriented_torus"
    ORIENTED_TORUS = "oriented_torus"
    PATH_1D = "path_1d"
    CYCLE_1D = "cycle_1d"
    ORIENTED_CYCLE_1D = "oriented_cycle_1d"


class Boundary(Enum):
    PERIODIC = "periodic"
    REFLECTING = "reflecting"


_PERIODIC_FAMILIES = {
    Family.UNORIENTED_TORUS,
    Family.ORIENTED_TORUS,
    Family.CYCLE_1D,
    Family.ORIENTED_CYCLE_1D,
}


@dataclass(frozen=True)
class TopologySpec:
    """Declarative description of a topology instance.

    ``dimension`` applies to the torus families only and must be 1 for the
    1D families.  ``boundary`` must be given for PATH_1D and omitted
    elsewhere.
    """

    family: Family
    side: int
    dimension: int = 1
    boundary: Boundary | None = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.side < 1:
            raise ValueError(f"side must be >= 1, got {self.side}")
        if self.family in _PERIODIC_FAMILIES and self.side < 3:
            raise ValueError(
                f"{self.family.value} needs side >= 3 to stay a simple graph, got {self.side}"
            )
        if self.family in (Family.PATH_1D, Family.CYCLE_1D, Family.ORIENTED_CYCLE_1D):
            if self.dimension != 1:
                raise ValueError(f"{self.family.value} is one-dimensional")
        if self.family is Family.PATH_1D:
            if self.boundary is None:
                raise ValueError("path_1d requires an explicit boundary")
            if self.side < 2:
                raise ValueError("path_1d needs side >= 2")
        elif self.boundary is not None:
            raise ValueError(f"boundary only applies to path_1d, not {self.family.value}")

    @property
    def n_vertices(self) -> int:
        if self.family in (Family.UNORIENTED_TORUS, Family.ORIENTED_TORUS):
            return self.side**self.dimension
        return self.side

    def to_dict(self) -> dict:
        d = {"family": self.family.value, "side": self.side, "dimension": self.dimension}
        if self.boundary is not None:
            d["boundary"] = self.boundary.value
        return d

    @staticmethod
    def from_dict(d: dict) -> "TopologySpec":
        allowed = {"family", "side", "dimension", "boundary"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown topology keys: {sorted(unknown)}")
        if "family" not in d or "side" not in d:
            raise ValueError("topology needs at least 'family' and 'side'")
        return TopologySpec(
            family=Family(d["family"]),
            side=int(d["side"]),
            dimension=int(d.get("dimension", 1)),
            boundary=Boundary(d["boundary"]) if d.get("boundary") is not None else None,
        )


class Topology:
    """A built topology: out-neighbor table with weights plus metric helpers.

    Vertices are indexed 0..N-1; on tori index = sum_i coord_i * side**i.
    Out-neighbors are stored in canonical order (offset -e_1, +e_1, -e_2,
    +e_2, ...) so that walk sampling against cumulative weights is
    reproducible across runs and platforms.  Instances are immutable after
    construction and safe to share between concurrent readers.
    """

    def __init__(self, spec: TopologySpec):
        self.spec = spec
        self.n = spec.n_vertices
        self._build_tables()

    # -- construction -------------------------------------------------

    def _coords(self) -> np.ndarray:
        """(N, d) array of vertex coordinates, canonical indexing."""
        if self.spec.family in (Family.UNORIENTED_TORUS, Family.ORIENTED_TORUS):
            d, L = self.spec.dimension, self.spec.side
            idx = np.arange(self.n)
            cols = [(idx // L**i) % L for i in range(d)]
            return np.stack(cols, axis=1)
        return np.arange(self.n).reshape(-1, 1)

    def _build_tables(self) -> None:
        spec = self.spec
        L = spec.side
        n = self.n
        coords = self._coords()
        self.coords = coords

        if spec.family is Family.UNORIENTED_TORUS or spec.family is Family.CYCLE_1D:
            d = spec.dimension if spec.family is Family.UNORIENTED_TORUS else 1
            deg = 2 * d
            nbr = np.empty((n, deg), dtype=np.int64)
            for i in range(d):
                stepin = L**i
                c = coords[:, i]
                down = np.arange(n) + ((c - 1) % L - c) * stepin
                up = np.arange(n) + ((c + 1) % L - c) * stepin
                nbr[:, 2 * i] = down
                nbr[:, 2 * i + 1] = up
            w = np.full((n, deg), 1.0 / deg)
        elif spec.family is Family.ORIENTED_TORUS or spec.family is Family.ORIENTED_CYCLE_1D:
            d = spec.dimension if spec.family is Family.ORIENTED_TORUS else 1
            deg = d
            nbr = np.empty((n, deg), dtype=np.int64)
            for i in range(d):
                stepin = L**i
                c = coords[:, i]
                nbr[:, i] = np.arange(n) + ((c - 1) % L - c) * stepin
            w = np.full((n, deg), 1.0 / deg)
        elif spec.family is Family.PATH_1D:
            # Reflecting: endpoints move to their unique neighbor surely.
            nbr = np.empty((n, 2), dtype=np.int64)
            w = np.full((n, 2), 0.5)
            idx = np.arange(n)
            nbr[:, 0] = np.maximum(idx - 1, 0)
            nbr[:, 1] = np.minimum(idx + 1, n - 1)
            nbr[0] = (1, 1)
            nbr[-1] = (n - 2, n - 2)
            w[0] = (1.0, 0.0)
            w[-1] = (1.0, 0.0)
        else:  # pragma: no cover - closed enum
            raise ValueError(f"unhandled family {spec.family}")

        self.out_nbr = nbr
        self.out_w = w
        cum = np.cumsum(w, axis=1)
        cum[:, -1] = 1.0  # exact upper fence for the inverse-CDF sampler
        self.out_cumw = cum
        self.out_deg = (w > 0).sum(axis=1)

        self._build_undirected()

    def _build_undirected(self) -> None:
        """Undirected adjacency (orientation ignored), padded with -1."""
        n = self.n
        width = self.out_nbr.shape[1]
        src = np.repeat(np.arange(n, dtype=np.int64), width)
        dst = self.out_nbr.ravel()
        keep = (self.out_w.ravel() > 0) & (src != dst)
        lo = np.minimum(src[keep], dst[keep])
        hi = np.maximum(src[keep], dst[keep])
        edges = np.unique(np.stack([lo, hi], axis=1), axis=0)
        u = np.concatenate([edges[:, 0], edges[:, 1]])
        v = np.concatenate([edges[:, 1], edges[:, 0]])
        order = np.lexsort((v, u))
        u, v = u[order], v[order]
        deg = np.bincount(u, minlength=n)
        maxdeg = int(deg.max()) if len(u) else 1
        und = np.full((n, maxdeg), -1, dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(deg)[:-1]])
        und[u, np.arange(len(u)) - starts[u]] = v
        self.und_nbr = und
        self.und_deg = deg.astype(np.int64)

    # -- queries ------------------------------------------------------

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range [0, {self.n})")

    def neighbors(self, v: int) -> list[tuple[int, float]]:
        """Canonically ordered (vertex, weight) out-neighbors of ``v``."""
        self._check_vertex(v)
        return [
            (int(self.out_nbr[v, j]), float(self.out_w[v, j]))
            for j in range(self.out_nbr.shape[1])
            if self.out_w[v, j] > 0
        ]

    def graph_distance(self, u: int, v: int) -> int:
        """Undirected shortest-path distance (orientation ignored)."""
        self._check_vertex(u)
        self._check_vertex(v)
        spec = self.spec
        if spec.family is Family.PATH_1D:
            return abs(u - v)
        if spec.family in (Family.CYCLE_1D, Family.ORIENTED_CYCLE_1D):
            d = abs(u - v)
            return min(d, spec.side - d)
        delta = np.abs(self.coords[u] - self.coords[v])
        return int(np.minimum(delta, spec.side - delta).sum())

    def ball(self, v: int, r: int) -> np.ndarray:
        """Sorted vertices at undirected distance <= r from ``v``."""
        self._check_vertex(v)
        if r < 0:
            raise ValueError("radius must be >= 0")
        dist = self.bfs_distances([v], cap=r)
        return np.flatnonzero(dist >= 0)

    def bfs_distances(self, sources: list[int] | np.ndarray, cap: int | None = None) -> np.ndarray:
        """Multi-source undirected BFS; unreached (or beyond cap) is -1."""
        dist = np.full(self.n, -1, dtype=np.int64)
        frontier = np.unique(np.asarray(sources, dtype=np.int64))
        if frontier.size == 0:
            return dist
        dist[frontier] = 0
        d = 0
        while frontier.size and (cap is None or d < cap):
            nxt = self.und_nbr[frontier].ravel()
            nxt = np.unique(nxt[nxt >= 0])
            nxt = nxt[dist[nxt] < 0]
            d += 1
            dist[nxt] = d
            frontier = nxt
        return dist

    def kernel_stats(self) -> "KernelStats":
        in_sums = np.zeros(self.n)
        np.add.at(in_sums, self.out_nbr.ravel(), self.out_w.ravel())
        ok = bool(np.all(np.abs(in_sums - 1.0) <= 1e-12))
        kmin = float(self.out_w[self.out_w > 0].min())
        return KernelStats(
            max_degree=int(self.und_deg.max()),
            k_min=kmin,
            transitive_in_sum_ok=ok,
            in_sums=in_sums,
        )


@dataclass(frozen=True)
class KernelStats:
    """Kernel constants feeding the small-density threshold bounds."""

    max_degree: int
    k_min: float
    transitive_in_sum_ok: bool
    in_sums: np.ndarray


def build_topology(spec: TopologySpec) -> Topology:
    """Construct the neighbor/weight tables for ``spec`` and validate them."""
    topo = Topology(spec)
    row_sums = topo.out_w.sum(axis=1)
    if not np.all(np.abs(row_sums - 1.0) < 1e-12):
        raise AssertionError("kernel rows do not sum to 1")
    return topo
