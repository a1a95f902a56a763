"""Batched syndrome-vector machinery.

A batch of syndrome vectors is a boolean array of shape ``(n, S)``: row ``v``
holds bit ``mu_v`` for each of ``S`` independent samples.  Pauli noise acts on a
batch by XOR-ing toggle sets; MCNOTs move bits between copies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..graphs import A, B, Bicoloring, Graph, other

# Pauli codes: 0=I, 1=X, 2=Y, 3=Z
PAULIS = ("I", "X", "Y", "Z")
_X_PART = np.array([0, 1, 1, 0], dtype=bool)
_Z_PART = np.array([0, 0, 1, 1], dtype=bool)

TABLE_VERTEX_CAP = 20


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    measurement_noise: bool = False

    def __post_init__(self):
        for name in ("p1", "p2"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name}={val} outside [0, 1]")

    def alpha(self, d: int) -> float:
        return (1.0 - self.p2) ** (d + 1)

    def beta(self, bandaid_purity: float) -> float:
        return (1.0 - self.p2) ** 2 * bandaid_purity


@dataclass(frozen=True)
class BandaidSpec:
    purity: float
    schedule: str | tuple[int, ...] = "uniform_random"

    def __post_init__(self):
        if not 0.0 <= self.purity <= 1.0:
            raise ValueError(f"bandaid purity {self.purity} outside [0, 1]")
        if not (self.schedule == "uniform_random" or isinstance(self.schedule, tuple)):
            raise ValueError("schedule must be 'uniform_random' or a tuple of vertices")


class Sampler(Protocol):
    n: int

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray: ...


@dataclass(frozen=True)
class IndependentSampler:
    """Each bit ``mu_v`` is set independently with probability ``q[v]``."""

    q: tuple[float, ...]

    def __post_init__(self):
        if any(not 0.0 <= x <= 1.0 for x in self.q):
            raise ValueError("flip probabilities must lie in [0, 1]")

    @classmethod
    def uniform(cls, n: int, q: float) -> "IndependentSampler":
        return cls((float(q),) * n)

    @classmethod
    def from_purity(cls, purities) -> "IndependentSampler":
        return cls(tuple((1.0 - float(x)) / 2.0 for x in purities))

    @property
    def n(self) -> int:
        return len(self.q)

    def sample(self, rng, size):
        return rng.random((self.n, size)) < np.asarray(self.q)[:, None]


@dataclass(frozen=True)
class TableSampler:
    """Explicit distribution over all ``2**n`` syndrome vectors (bit v of the index is mu_v)."""

    n: int
    probs: np.ndarray

    def __post_init__(self):
        if self.n > TABLE_VERTEX_CAP:
            raise ValueError(f"table sampler limited to {TABLE_VERTEX_CAP} vertices")
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (1 << self.n,):
            raise ValueError("table size must be 2**n")
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("table must be a probability distribution")

    def sample(self, rng, size):
        idx = rng.choice(len(self.probs), size=size, p=self.probs / self.probs.sum())
        return ((idx[None, :] >> np.arange(self.n)[:, None]) & 1).astype(bool)


class GraphContext:
    """Precomputed index arrays for one graph and its coloring."""

    def __init__(self, g: Graph, col: Bicoloring):
        self.g = g
        self.col = col
        self.n = g.n
        self.adj = np.zeros((g.n, g.n), dtype=bool)
        for u, v in g.edges:
            self.adj[u, v] = self.adj[v, u] = True
        self.nbrs = [np.array(g.neighbors(v), dtype=np.intp) for v in range(g.n)]
        self.idx = {A: np.array(col.a_vertices, dtype=np.intp), B: np.array(col.b_vertices, dtype=np.intp)}
        if g.is_regular():
            self.nbr_table = np.array([g.neighbors(v) for v in range(g.n)], dtype=np.intp)
        else:
            self.nbr_table = None

    @property
    def degree(self) -> int:
        return self.g.max_degree


def pauli_toggle(g: Graph, site: int, p: str) -> set[int]:
    """Syndrome bits flipped by a single Pauli ``p`` on ``site``."""
    out: set[int] = set()
    if p in ("Z", "Y"):
        out ^= {site}
    if p in ("X", "Y"):
        out ^= set(g.neighbors(site))
    return out


def hit_positions(rng: np.random.Generator, size: int, p: float) -> np.ndarray:
    """Sample indices hit by an independent event of probability ``p``."""
    if p <= 0.0:
        return np.empty(0, dtype=np.intp)
    if p >= 1.0:
        return np.arange(size)
    count = rng.binomial(size, p)
    return np.sort(rng.choice(size, count, replace=False))


def toggle_sites(ctx: GraphContext, state: np.ndarray, sites, cols: np.ndarray, paulis: np.ndarray) -> None:
    """Apply Pauli codes ``paulis`` on ``sites`` (scalar or per-column) in columns ``cols``."""
    zb = _Z_PART[paulis]
    xb = _X_PART[paulis]
    if np.isscalar(sites):
        state[sites, cols[zb]] ^= True
        xc = cols[xb]
        for u in ctx.nbrs[sites]:
            state[u, xc] ^= True
        return
    sites = np.asarray(sites)
    state[sites[zb], cols[zb]] ^= True
    xs, xc = sites[xb], cols[xb]
    if ctx.nbr_table is None:
        for s, c in zip(xs, xc):
            state[ctx.nbrs[s], c] ^= True
    else:
        rows = ctx.nbr_table[xs]
        state[rows.T, xc[None, :]] ^= True


def depolarize_pair_layer(ctx: GraphContext, s: np.ndarray, t: np.ndarray, p2: float, rng, sites=None) -> None:
    """Two-qubit depolarizing channel on every site, acting on copies ``s`` and ``t``."""
    if p2 <= 0.0:
        return
    size = s.shape[1]
    for k in range(ctx.n) if sites is None else sites:
        cols = hit_positions(rng, size, p2)
        if cols.size == 0:
            continue
        pair = rng.integers(0, 16, cols.size)
        toggle_sites(ctx, s, k, cols, pair >> 2)
        toggle_sites(ctx, t, k, cols, pair & 3)


def depolarize_single_layer(ctx: GraphContext, s: np.ndarray, p: float, rng, sites=None) -> None:
    if p <= 0.0:
        return
    size = s.shape[1]
    for k in range(ctx.n) if sites is None else sites:
        cols = hit_positions(rng, size, p)
        if cols.size:
            toggle_sites(ctx, s, k, cols, rng.integers(0, 4, cols.size))


def apply_mcnot(ctx: GraphContext, purify_color: str, source: np.ndarray, target: np.ndarray) -> None:
    """In place: ``target[P] ^= source[P]`` and ``source[Q] ^= target[Q]`` for ``P`` the purified color."""
    p_idx = ctx.idx[purify_color]
    q_idx = ctx.idx[other(purify_color)]
    target[p_idx] ^= source[p_idx]
    source[q_idx] ^= target[q_idx]


def mcnot_vectors(g: Graph, col: Bicoloring, purify_color: str, source, target):
    """Pure version of :func:`apply_mcnot` on single syndrome vectors."""
    if len(source) != g.n or len(target) != g.n:
        raise ValueError("syndrome vector size mismatch")
    ctx = GraphContext(g, col)
    src = np.array(source, dtype=bool).reshape(g.n, 1)
    tgt = np.array(target, dtype=bool).reshape(g.n, 1)
    apply_mcnot(ctx, purify_color, src, tgt)
    return src[:, 0].astype(int).tolist(), tgt[:, 0].astype(int).tolist()


def measure_syndrome(ctx: GraphContext, state: np.ndarray, measured_color: str, noise: NoiseModel, rng) -> np.ndarray:
    """Syndrome bits of ``measured_color`` vertices, shape ``(|color|, S)``.

    With measurement noise each measured qubit first passes a one-qubit
    depolarizing channel of strength ``p2``; the copy is consumed, so ``state``
    may be overwritten.
    """
    if noise.measurement_noise and noise.p2 > 0:
        depolarize_single_layer(ctx, state, noise.p2, rng)
    return state[ctx.idx[measured_color]]
