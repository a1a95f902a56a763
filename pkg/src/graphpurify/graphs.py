"""Graphs, two-colorings, edge colorings and Pauli supports of stabilizer products.

Vertices are dense integers ``0..n-1``.  Stabilizer products are addressed either
by a full vertex bitmask (bit ``v`` set means ``K_v`` is a factor) or by a
:class:`CorrelatorIndex`, whose masks index the A vertices and the B vertices in
ascending order respectively.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

A = "A"
B = "B"

PAULI_LABELS = ("I", "X", "Z", "Y")  # index = x_bit + 2 * z_bit


class GraphError(ValueError):
    pass


class NotBicolorable(GraphError):
    pass


@dataclass(frozen=True)
class Graph:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.vertex_count

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(nb) for nb in self.adjacency), default=0)

    def is_regular(self) -> bool:
        return len({len(nb) for nb in self.adjacency}) <= 1

    def neighbor_mask(self, v: int) -> int:
        m = 0
        for u in self.adjacency[v]:
            m |= 1 << u
        return m

    def closed_neighborhood(self, v: int) -> frozenset[int]:
        return frozenset(self.adjacency[v]) | {v}

    def to_json(self) -> str:
        return json.dumps({"vertices": self.vertex_count, "edges": [list(e) for e in self.edges]})


def build_graph(edge_list: Iterable[Sequence[int]], vertex_count: int) -> Graph:
    if vertex_count < 1:
        raise GraphError("vertex_count must be positive")
    seen: set[tuple[int, int]] = set()
    edges = []
    adj: list[list[int]] = [[] for _ in range(vertex_count)]
    for e in edge_list:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{vertex_count - 1}")
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        edges.append(key)
        adj[u].append(v)
        adj[v].append(u)
    return Graph(vertex_count, tuple(edges), tuple(tuple(sorted(nb)) for nb in adj))


def graph_from_json(text: str) -> Graph:
    data = json.loads(text)
    return build_graph(data["edges"], data["vertices"])


# -- standard graphs -------------------------------------------------------


def ring(n: int) -> Graph:
    if n < 4 or n % 2:
        raise GraphError(f"ring needs an even size >= 4, got {n}")
    return build_graph([(i, (i + 1) % n) for i in range(n)], n)


def torus(w: int, h: int) -> Graph:
    if w < 4 or h < 4 or w % 2 or h % 2:
        raise GraphError(f"torus needs even dimensions >= 4, got {w}x{h}")
    edges = []
    for y in range(h):
        for x in range(w):
            v = y * w + x
            edges.append((v, y * w + (x + 1) % w))
            edges.append((v, ((y + 1) % h) * w + x))
    return build_graph(edges, w * h)


def path(n: int) -> Graph:
    if n < 1:
        raise GraphError("path needs at least one vertex")
    return build_graph([(i, i + 1) for i in range(n - 1)], n)


def star(d: int) -> Graph:
    """Star with center 0 and leaves ``1..d``."""
    if d < 1:
        raise GraphError("star needs at least one leaf")
    return build_graph([(0, i) for i in range(1, d + 1)], d + 1)


_NAME_RE = re.compile(r"^(ring|path|star):(\d+)$|^torus:(\d+)x(\d+)$")


def make_standard(name: str) -> Graph:
    """Build a graph from a reference like ``ring:6``, ``torus:4x4``, ``star:4``, ``path:2``."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise GraphError(f"unknown graph reference {name!r}")
    if m.group(1):
        size = int(m.group(2))
        return {"ring": ring, "path": path, "star": star}[m.group(1)](size)
    return torus(int(m.group(3)), int(m.group(4)))


# -- colorings ---------------------------------------------------------------


@dataclass(frozen=True)
class Bicoloring:
    color_of: tuple[str, ...]

    @property
    def a_vertices(self) -> tuple[int, ...]:
        return tuple(v for v, c in enumerate(self.color_of) if c == A)

    @property
    def b_vertices(self) -> tuple[int, ...]:
        return tuple(v for v, c in enumerate(self.color_of) if c == B)

    def vertices(self, color: str) -> tuple[int, ...]:
        return self.a_vertices if color == A else self.b_vertices

    def mask(self, color: str) -> int:
        m = 0
        for v in self.vertices(color):
            m |= 1 << v
        return m

    def swapped(self) -> "Bicoloring":
        return Bicoloring(tuple(B if c == A else A for c in self.color_of))


def bicolor(g: Graph) -> Bicoloring:
    color: list[str | None] = [None] * g.n
    for root in range(g.n):
        if color[root] is not None:
            continue
        color[root] = A
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                if color[v] is None:
                    color[v] = B if color[u] == A else A
                    queue.append(v)
                elif color[v] == color[u]:
                    raise NotBicolorable(f"odd cycle through edge ({u}, {v})")
    return Bicoloring(tuple(color))  # type: ignore[arg-type]


def other(color: str) -> str:
    return B if color == A else A


@dataclass(frozen=True)
class EdgeColoring:
    color_of_edge: dict[tuple[int, int], int]
    step_count: int
    exceeds_degree: bool = False

    def steps(self) -> list[list[tuple[int, int]]]:
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.step_count)]
        for e, c in self.color_of_edge.items():
            out[c - 1].append(e)
        return out


def is_proper_edge_coloring(g: Graph, coloring: dict[tuple[int, int], int]) -> bool:
    if set(coloring) != set(g.edges):
        return False
    for v in range(g.n):
        labels = [coloring[(min(u, v), max(u, v))] for u in g.adjacency[v]]
        if len(labels) != len(set(labels)):
            return False
    return True


def edge_color(g: Graph) -> EdgeColoring:
    """Proper edge coloring, using the max degree ``d`` colors whenever possible.

    Bipartite graphs always admit ``d`` colors (Konig); this is found by
    alternating-path recoloring.  The ``exceeds_degree`` flag is kept for graphs
    that need ``d + 1``.
    """
    d = g.max_degree
    if d == 0:
        return EdgeColoring({}, 0)
    at: list[dict[int, int]] = [dict() for _ in range(g.n)]  # vertex -> {color: neighbor}
    ok = True
    for u, v in g.edges:
        free_u = next(c for c in range(1, d + 2) if c not in at[u])
        free_v = next(c for c in range(1, d + 2) if c not in at[v])
        if free_u != free_v and free_u not in at[v]:
            c = free_u
        elif free_u != free_v and free_v not in at[u]:
            c = free_v
        elif free_u == free_v:
            c = free_u
        else:
            # flip the (free_u, free_v) alternating path starting at v
            a, b = free_u, free_v
            path_vs = [v]
            x, col = v, a
            while col in at[x]:
                y = at[x][col]
                path_vs.append(y)
                x, col = y, (b if col == a else a)
            if u in path_vs:
                ok = False
                c = next(c for c in range(1, d + 2) if c not in at[u] and c not in at[v])
            else:
                recolor = []
                for p, q in zip(path_vs, path_vs[1:]):
                    cpq = next(k for k, w in at[p].items() if w == q)
                    recolor.append((p, q, cpq))
                for p, q, cpq in recolor:
                    del at[p][cpq]
                    del at[q][cpq]
                for p, q, cpq in recolor:
                    nc = b if cpq == a else a
                    at[p][nc] = q
                    at[q][nc] = p
                c = a
        at[u][c] = v
        at[v][c] = u
    coloring = {}
    for u in range(g.n):
        for c, v in at[u].items():
            coloring[(min(u, v), max(u, v))] = c
    used = max(coloring.values())
    if not is_proper_edge_coloring(g, coloring):
        raise GraphError("edge coloring failed")
    return EdgeColoring(coloring, used, exceeds_degree=(not ok) or used > d)


# -- correlators ---------------------------------------------------------------


@dataclass(frozen=True)
class CorrelatorIndex:
    """Generator masks over the A vertices and the B vertices (ascending order)."""

    a_mask: int
    b_mask: int

    @property
    def weight(self) -> int:
        return bin(self.a_mask).count("1") + bin(self.b_mask).count("1")

    def to_vertex_mask(self, col: Bicoloring) -> int:
        m = 0
        for i, v in enumerate(col.a_vertices):
            if self.a_mask >> i & 1:
                m |= 1 << v
        for i, v in enumerate(col.b_vertices):
            if self.b_mask >> i & 1:
                m |= 1 << v
        return m

    @classmethod
    def from_vertex_mask(cls, mask: int, col: Bicoloring) -> "CorrelatorIndex":
        a = sum(1 << i for i, v in enumerate(col.a_vertices) if mask >> v & 1)
        b = sum(1 << i for i, v in enumerate(col.b_vertices) if mask >> v & 1)
        return cls(a, b)

    @classmethod
    def of_vertices(cls, vertices: Iterable[int], col: Bicoloring) -> "CorrelatorIndex":
        m = 0
        for v in vertices:
            m |= 1 << v
        return cls.from_vertex_mask(m, col)

    def check_size(self, col: Bicoloring) -> None:
        if self.a_mask >> len(col.a_vertices) or self.b_mask >> len(col.b_vertices):
            raise GraphError(f"correlator {self} does not fit the coloring")

    def to_hex(self) -> str:
        return f"{self.a_mask:x}:{self.b_mask:x}"

    @classmethod
    def from_hex(cls, text: str) -> "CorrelatorIndex":
        a, b = text.split(":")
        return cls(int(a, 16), int(b, 16))


@dataclass(frozen=True)
class SitePauli:
    labels: tuple[str, ...]
    sign: int  # overall +1/-1 of the product relative to the tensor of labels

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "+") + "".join(self.labels)


def xz_bits(g: Graph, vertex_mask: int) -> tuple[int, int]:
    """X and Z bitmasks of the product of generators in ``vertex_mask``."""
    z = 0
    for v in range(g.n):
        if bin(g.neighbor_mask(v) & vertex_mask).count("1") & 1:
            z |= 1 << v
    return vertex_mask, z


def support_mask(g: Graph, vertex_mask: int) -> int:
    x, z = xz_bits(g, vertex_mask)
    return x | z


def pauli_support(g: Graph, c: CorrelatorIndex | int, col: Bicoloring | None = None) -> SitePauli:
    if isinstance(c, CorrelatorIndex):
        if col is None:
            col = bicolor(g)
        c.check_size(col)
        mask = c.to_vertex_mask(col)
    else:
        mask = c
    x, z = xz_bits(g, mask)
    labels = tuple(PAULI_LABELS[(x >> v & 1) + 2 * (z >> v & 1)] for v in range(g.n))
    inner_edges = sum(1 for u, v in g.edges if mask >> u & 1 and mask >> v & 1)
    # X Z = -iY at each Y site; Y count is always even for a Hermitian product
    ys = labels.count("Y")
    sign = -1 if (inner_edges + ys // 2) & 1 else 1
    return SitePauli(labels, sign)
