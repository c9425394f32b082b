"""Lattice and network topologies.

Cell ids on a lattice are row-major: ``id = y * width + x``.  Neighbor lists
are sorted by id so that trajectories do not depend on traversal order.

Only grids and graphs are provided; GIS layers and continuous free space are
not implemented.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

NEIGHBORHOODS = ("vonNeumann4", "moore8")
BOUNDARIES = ("clamp", "wrap")

_OFFSETS = {
    "vonNeumann4": ((0, -1), (-1, 0), (1, 0), (0, 1)),
    "moore8": ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)),
}


class StaticNetworkError(RuntimeError):
    pass


@dataclass(frozen=True)
class LatticeEnv:
    width: int
    height: int
    neighborhood: str = "moore8"
    boundary: str = "clamp"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("lattice dimensions must be positive")
        if self.neighborhood not in NEIGHBORHOODS:
            raise ValueError(f"neighborhood must be one of {NEIGHBORHOODS}, got {self.neighborhood!r}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def index(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"coordinates ({x}, {y}) outside {self.width}x{self.height} lattice")
        return y * self.width + x

    def coords(self, cell: int) -> tuple[int, int]:
        self._check(cell)
        return cell % self.width, cell // self.width

    def _check(self, cell):
        if not 0 <= cell < self.n_cells:
            raise IndexError(f"cell id {cell} outside 0..{self.n_cells - 1}")

    def _compute(self, cell: int) -> tuple[int, ...]:
        x, y = cell % self.width, cell // self.width
        out = set()
        for dx, dy in _OFFSETS[self.neighborhood]:
            nx, ny = x + dx, y + dy
            if self.boundary == "wrap":
                nx %= self.width
                ny %= self.height
            elif not (0 <= nx < self.width and 0 <= ny < self.height):
                continue
            nid = ny * self.width + nx
            if nid != cell:
                out.add(nid)
        return tuple(sorted(out))

    @cached_property
    def _table(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self._compute(c) for c in range(self.n_cells))

    def neighbors(self, cell: int) -> tuple[int, ...]:
        self._check(cell)
        return self._table[cell]

    def neighbor_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Padded ``(n_cells, max_deg)`` neighbor table and per-cell counts."""
        counts = np.array([len(t) for t in self._table], dtype=np.int64)
        table = np.full((self.n_cells, max(int(counts.max()), 1)), -1, dtype=np.int64)
        for c, nb in enumerate(self._table):
            table[c, : len(nb)] = nb
        return table, counts


@dataclass
class NetworkEnv:
    n_nodes: int
    edges: list = field(default_factory=list)
    directed: bool = False
    mutability: str = "static"

    def __post_init__(self):
        if self.mutability not in ("static", "dynamic"):
            raise ValueError(f"mutability must be 'static' or 'dynamic', got {self.mutability!r}")
        self.edges = [(int(u), int(v)) for u, v in self.edges]
        for u, v in self.edges:
            self._check(u)
            self._check(v)
        self._rebuild()

    def _check(self, node):
        if not 0 <= node < self.n_nodes:
            raise IndexError(f"node id {node} outside 0..{self.n_nodes - 1}")

    def _rebuild(self):
        adj = [set() for _ in range(self.n_nodes)]
        for u, v in self.edges:
            if u == v:
                continue
            adj[u].add(v)
            if not self.directed:
                adj[v].add(u)
        self._adj = [tuple(sorted(s)) for s in adj]

    def neighbors(self, node: int) -> tuple[int, ...]:
        self._check(node)
        return self._adj[node]

    def add_edge(self, u: int, v: int) -> None:
        if self.mutability == "static":
            raise StaticNetworkError("cannot add edges to a static network")
        self._check(u)
        self._check(v)
        self.edges.append((u, v))
        self._rebuild()

    def remove_edge(self, u: int, v: int) -> None:
        if self.mutability == "static":
            raise StaticNetworkError("cannot remove edges from a static network")
        keep = [e for e in self.edges if e != (u, v) and (self.directed or e != (v, u))]
        if len(keep) == len(self.edges):
            raise KeyError(f"no edge ({u}, {v})")
        self.edges = keep
        self._rebuild()

    @classmethod
    def from_edge_list(cls, path, n_nodes: int = None, directed: bool = False, mutability: str = "static"):
        """Read a whitespace-separated ``u v`` pair per line; ``#`` starts a comment."""
        edges = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
        if n_nodes is None:
            n_nodes = 1 + max((max(e) for e in edges), default=-1)
        return cls(n_nodes, edges, directed, mutability)
