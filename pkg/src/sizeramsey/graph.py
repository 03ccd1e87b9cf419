"""Core graph types and their file formats.

Graph        immutable simple undirected graph on vertices 0..n-1
TwoColoring  red/blue label for every edge of a host graph
RootedTree   parent map plus root
EmbeddingMap injective pattern -> host vertex map

Edges are stored as a lexicographically sorted (m, 2) int64 array with
u < v in every row; neighbour sets and the dense adjacency matrix are built
lazily on first use.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import GraphError

RED = "red"
BLUE = "blue"
COLOURS = (RED, BLUE)


def other(colour: str) -> str:
    return BLUE if colour == RED else RED


def _normalise_edges(n: int, edges) -> np.ndarray:
    arr = np.asarray(edges if not isinstance(edges, (set, frozenset)) else sorted(edges), dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    arr = arr.reshape(-1, 2)
    if (arr < 0).any() or (arr >= n).any():
        raise GraphError("edge endpoint out of range", n=n)
    if (arr[:, 0] == arr[:, 1]).any():
        raise GraphError("self-loop")
    arr = np.sort(arr, axis=1)
    keys = np.unique(arr[:, 0] * n + arr[:, 1])
    out = np.empty((keys.size, 2), dtype=np.int64)
    out[:, 0] = keys // n
    out[:, 1] = keys % n
    return out


class Graph:
    """Immutable simple undirected graph.

    Duplicate edges in the input are merged; loops and out-of-range
    endpoints raise GraphError.
    """

    __slots__ = ("n", "_edges", "_nbrs", "_matrix", "_index")

    def __init__(self, n: int, edges=()):
        if n < 0:
            raise GraphError("negative vertex count")
        self.n = int(n)
        arr = _normalise_edges(self.n, edges)
        arr.setflags(write=False)
        self._edges = arr
        self._nbrs = None
        self._matrix = None
        self._index = None

    @classmethod
    def _from_sorted(cls, n: int, arr: np.ndarray) -> "Graph":
        g = cls.__new__(cls)
        g.n = int(n)
        arr = np.ascontiguousarray(arr, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        g._edges = arr
        g._nbrs = None
        g._matrix = None
        g._index = None
        return g

    @classmethod
    def from_keys(cls, n: int, keys: np.ndarray) -> "Graph":
        """Build from unique sorted keys u*n+v with u < v."""
        keys = np.asarray(keys, dtype=np.int64)
        arr = np.empty((keys.size, 2), dtype=np.int64)
        if n:
            arr[:, 0] = keys // n
            arr[:, 1] = keys % n
        return cls._from_sorted(n, arr)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        iu = np.triu_indices(n, 1)
        return cls._from_sorted(n, np.stack(iu, axis=1))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, [(i, i + 1) for i in range(n - 1)])

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    @property
    def m(self) -> int:
        return int(self._edges.shape[0])

    def edge_keys(self) -> np.ndarray:
        return self._edges[:, 0] * self.n + self._edges[:, 1]

    def edge_list(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self._edges]

    def edge_set(self) -> frozenset:
        return frozenset(self.edge_list())

    def neighbours(self, v: int) -> frozenset:
        if self._nbrs is None:
            nb = [set() for _ in range(self.n)]
            for u, w in self._edges.tolist():
                nb[u].add(w)
                nb[w].add(u)
            self._nbrs = [frozenset(s) for s in nb]
        return self._nbrs[v]

    def adjacency(self) -> list[frozenset]:
        if self.n:
            self.neighbours(0)
        return list(self._nbrs or [])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbours(u)

    def degree(self, v: int) -> int:
        return len(self.neighbours(v))

    def degrees(self) -> np.ndarray:
        return np.bincount(self._edges.ravel(), minlength=self.n)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix (cached, read-only)."""
        if self._matrix is None:
            a = np.zeros((self.n, self.n), dtype=bool)
            a[self._edges[:, 0], self._edges[:, 1]] = True
            a[self._edges[:, 1], self._edges[:, 0]] = True
            a.setflags(write=False)
            self._matrix = a
        return self._matrix

    def edge_index(self, u: int, v: int) -> int:
        """Row of edge uv in ``edges``; KeyError if absent."""
        if self._index is None:
            self._index = {k: i for i, k in enumerate(self.edge_keys().tolist())}
        if u > v:
            u, v = v, u
        return self._index[u * self.n + v]

    def induced_subgraph(self, vertices) -> tuple["Graph", list[int]]:
        """Subgraph induced on ``vertices``, relabelled 0..k-1 in the given order.

        Returns the subgraph and the list mapping new ids to old ids.
        """
        verts = [int(v) for v in vertices]
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[verts] = np.arange(len(verts))
        e = self._edges
        keep = (pos[e[:, 0]] >= 0) & (pos[e[:, 1]] >= 0)
        return Graph(len(verts), pos[e[keep]]), verts

    def restrict(self, vertices) -> "Graph":
        """Same vertex set, only edges with both ends in ``vertices``."""
        mask = np.zeros(self.n, dtype=bool)
        mask[list(vertices)] = True
        e = self._edges
        return Graph._from_sorted(self.n, e[mask[e[:, 0]] & mask[e[:, 1]]])

    def union(self, other: "Graph") -> "Graph":
        n = max(self.n, other.n)
        keys = np.union1d(self._edges[:, 0] * n + self._edges[:, 1], other._edges[:, 0] * n + other._edges[:, 1])
        return Graph.from_keys(n, keys)

    def is_subgraph_of(self, other: "Graph") -> bool:
        if self.n > other.n:
            return False
        n = other.n
        a = self._edges[:, 0] * n + self._edges[:, 1]
        b = other._edges[:, 0] * n + other._edges[:, 1]
        return bool(np.isin(a, b).all())

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            comp, stack = [], [s]
            seen[s] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self.neighbours(v):
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(sorted(comp))
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and np.array_equal(self._edges, other._edges)

    def __hash__(self) -> int:
        return hash((self.n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class TwoColoring:
    """Red/blue labelling aligned with ``host.edges`` (True means red)."""

    __slots__ = ("host", "_red", "_red_graph", "_blue_graph")

    def __init__(self, host: Graph, red_mask):
        red = np.asarray(red_mask, dtype=bool).reshape(-1)
        if red.shape[0] != host.m:
            raise GraphError("colouring must label every host edge exactly once")
        red = red.copy()
        red.setflags(write=False)
        self.host = host
        self._red = red
        self._red_graph = None
        self._blue_graph = None

    @classmethod
    def uniform(cls, host: Graph, colour: str) -> "TwoColoring":
        return cls(host, np.full(host.m, colour == RED))

    @classmethod
    def from_dict(cls, host: Graph, colours: Mapping) -> "TwoColoring":
        red = np.zeros(host.m, dtype=bool)
        seen = 0
        for (u, v), c in colours.items():
            red[host.edge_index(u, v)] = c == RED
            seen += 1
        if seen != host.m:
            raise GraphError("colouring is not total on the host edges")
        return cls(host, red)

    @property
    def red_mask(self) -> np.ndarray:
        return self._red

    def colour(self, u: int, v: int) -> str:
        return RED if self._red[self.host.edge_index(u, v)] else BLUE

    def subgraph(self, colour: str) -> Graph:
        if colour == RED:
            if self._red_graph is None:
                self._red_graph = Graph._from_sorted(self.host.n, self.host.edges[self._red])
            return self._red_graph
        if self._blue_graph is None:
            self._blue_graph = Graph._from_sorted(self.host.n, self.host.edges[~self._red])
        return self._blue_graph

    def restrict(self, sub: Graph) -> "TwoColoring":
        """The colouring seen by a subgraph of the host."""
        keys = self.host.edge_keys()
        idx = np.searchsorted(keys, sub.edge_keys())
        if sub.m and (idx.max() >= keys.size or not np.array_equal(keys[idx], sub.edge_keys())):
            raise GraphError("restriction target is not a subgraph of the host")
        return TwoColoring(sub, self._red[idx])

    def count(self, colour: str) -> int:
        r = int(self._red.sum())
        return r if colour == RED else self.host.m - r

    def as_dict(self) -> dict:
        return {(u, v): (RED if r else BLUE) for (u, v), r in zip(self.host.edge_list(), self._red.tolist())}

    def __eq__(self, other) -> bool:
        return isinstance(other, TwoColoring) and self.host == other.host and np.array_equal(self._red, other._red)


@dataclass(frozen=True)
class RootedTree:
    """Tree given by a parent map; the root maps to None."""

    parent: Mapping[int, int | None]
    root: int

    def __post_init__(self):
        roots = [v for v, p in self.parent.items() if p is None]
        if roots != [self.root]:
            raise GraphError("rooted tree needs exactly one root", roots=roots)
        for v in self.parent:
            seen = set()
            while v is not None:
                if v in seen:
                    raise GraphError("parent map has a cycle")
                seen.add(v)
                v = self.parent.get(v, "missing")
                if v == "missing":
                    raise GraphError("parent outside the tree")

    @classmethod
    def from_graph(cls, g: Graph, root: int = 0, vertices=None) -> "RootedTree":
        verts = set(range(g.n)) if vertices is None else set(vertices)
        parent = {root: None}
        order = [root]
        for v in order:
            for w in sorted(g.neighbours(v)):
                if w in verts and w not in parent:
                    parent[w] = v
                    order.append(w)
        if len(parent) != len(verts):
            raise GraphError("graph is not connected")
        if g.restrict(verts).m != len(verts) - 1:
            raise GraphError("graph is not a tree")
        return cls(parent, root)

    @property
    def vertices(self) -> list[int]:
        return sorted(self.parent)

    def __len__(self) -> int:
        return len(self.parent)

    def children(self) -> dict[int, list[int]]:
        ch = {v: [] for v in self.parent}
        for v, p in self.parent.items():
            if p is not None:
                ch[p].append(v)
        for v in ch:
            ch[v].sort()
        return ch

    def depths(self) -> dict[int, int]:
        ch = self.children()
        depth = {self.root: 0}
        stack = [self.root]
        while stack:
            v = stack.pop()
            for w in ch[v]:
                depth[w] = depth[v] + 1
                stack.append(w)
        return depth

    def bfs_order(self) -> list[int]:
        ch = self.children()
        order = [self.root]
        for v in order:
            order.extend(ch[v])
        return order

    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in self.parent.items() if p is not None]

    def max_degree(self) -> int:
        deg = {v: 0 for v in self.parent}
        for u, v in self.edges():
            deg[u] += 1
            deg[v] += 1
        return max(deg.values()) if deg else 0

    def to_graph(self) -> tuple[Graph, list[int]]:
        """Relabelled graph plus new-id -> tree-vertex list (BFS order)."""
        order = self.bfs_order()
        pos = {v: i for i, v in enumerate(order)}
        return Graph(len(order), [(pos[u], pos[v]) for u, v in self.edges()]), order


@dataclass
class EmbeddingMap:
    """Pattern vertex -> host vertex. Validation lives in ``validate``."""

    pattern: Graph
    image: dict = field(default_factory=dict)
    colour: str | None = None

    def to_json(self) -> str:
        return json.dumps({str(k): int(v) for k, v in sorted(self.image.items())}, sort_keys=False)


# ---------------------------------------------------------------- file formats

def format_edge_list(g: Graph, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.append(f"n {g.n}")
    lines.extend(f"{u} {v}" for u, v in g.edges.tolist())
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    n = None
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "n":
            if n is not None or len(parts) != 2:
                raise GraphError("bad 'n' header")
            n = int(parts[1])
            continue
        if n is None:
            raise GraphError("edge list must start with an 'n <count>' header")
        if len(parts) != 2:
            raise GraphError(f"bad edge line: {raw!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise GraphError("missing 'n <count>' header")
    return Graph(n, edges)


def format_graph_json(g: Graph) -> str:
    return json.dumps({"n": g.n, "edges": g.edges.tolist()}) + "\n"


def parse_graph_json(text: str) -> Graph:
    obj = json.loads(text)
    return Graph(int(obj["n"]), obj["edges"])


def format_colouring(c: TwoColoring) -> str:
    return "".join(f"{u} {v} {RED if r else BLUE}\n" for (u, v), r in zip(c.host.edges.tolist(), c.red_mask.tolist()))


def parse_colouring(text: str, host: Graph) -> TwoColoring:
    colours = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        u, v, c = line.split()
        if c not in COLOURS:
            raise GraphError(f"unknown colour {c!r}")
        u, v = int(u), int(v)
        key = (min(u, v), max(u, v))
        if key in colours:
            raise GraphError("edge coloured twice")
        colours[key] = c
    return TwoColoring.from_dict(host, colours)


def read_graph(path) -> Graph:
    with open(path) as fh:
        text = fh.read()
    return parse_graph_json(text) if text.lstrip().startswith("{") else parse_edge_list(text)


def write_graph(g: Graph, path, fmt: str = "edges", header: Iterable[str] = ()) -> None:
    text = format_graph_json(g) if fmt == "json" else format_edge_list(g, header)
    with open(path, "w") as fh:
        fh.write(text)
