"""Noisy graph-state creation by an edge-colored CPHASE schedule, then transmission.

Each CPHASE is followed by a two-qubit depolarizing channel on its endpoints.
A Pauli error is pushed through the CPHASEs still to come (X_u picks up Z_v for
every later gate on edge (u, v)), and the resulting frame ``X^x Z^z`` toggles
syndrome bit ``j`` by ``z_j + sum_{k in N(j)} x_k``.
"""

from __future__ import annotations

import numpy as np

from ..graphs import Bicoloring, EdgeColoring, Graph, GraphError, is_proper_edge_coloring
from .core import TABLE_VERTEX_CAP, GraphContext, depolarize_single_layer, hit_positions

# Pauli code -> (x, z) bits, codes 0=I 1=X 2=Y 3=Z
_XZ = ((0, 0), (1, 0), (1, 1), (0, 1))


def _frame_to_syndrome(g: Graph, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = z.copy()
    for j in range(g.n):
        for k in g.neighbors(j):
            out[j] ^= x[k]
    return out


def gate_toggle_masks(g: Graph, ec: EdgeColoring) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Gate order and, per gate and Pauli pair, the syndrome toggle vector.

    Returns ``(gates, masks)`` with ``masks`` of shape ``(len(gates), 16, n)``;
    pair index is ``4 * code_u + code_v``.
    """
    if not is_proper_edge_coloring(g, ec.color_of_edge):
        raise GraphError("edge coloring is not proper")
    steps = ec.steps()
    gates = [(e, t) for t, step in enumerate(steps) for e in sorted(step)]
    masks = np.zeros((len(gates), 16, g.n), dtype=bool)
    for gi, ((u, v), t) in enumerate(gates):
        later = [e for tt in range(t + 1, len(steps)) for e in steps[tt]]
        for pair in range(16):
            x = np.zeros(g.n, dtype=bool)
            z = np.zeros(g.n, dtype=bool)
            for site, code in ((u, pair >> 2), (v, pair & 3)):
                x[site] ^= bool(_XZ[code][0])
                z[site] ^= bool(_XZ[code][1])
            for a, b in later:
                z[b] ^= x[a]
                z[a] ^= x[b]
            masks[gi, pair] = _frame_to_syndrome(g, x, z)
    return gates, masks


class CreationSimulator:
    def __init__(self, g: Graph, ec: EdgeColoring):
        self.g = g
        self.ctx = GraphContext(g, _trivial_coloring(g))
        self.gates, self.masks = gate_toggle_masks(g, ec)

    @property
    def n(self) -> int:
        return self.g.n

    def run(self, p1: float, p2: float, rng, size: int) -> np.ndarray:
        state = np.zeros((self.g.n, size), dtype=bool)
        if p2 > 0:
            for gi in range(len(self.gates)):
                cols = hit_positions(rng, size, p2)
                if cols.size:
                    pair = rng.integers(0, 16, cols.size)
                    state[:, cols] ^= self.masks[gi, pair].T
        depolarize_single_layer(self.ctx, state, p1, rng)
        return state


def _trivial_coloring(g: Graph) -> Bicoloring:
    # the context only needs neighbor tables here; colors are irrelevant
    return Bicoloring(tuple("A" for _ in range(g.n)))


def simulate_creation_transmission(g: Graph, ec: EdgeColoring, p1: float, p2: float, rng, size: int) -> np.ndarray:
    return CreationSimulator(g, ec).run(p1, p2, rng, size)


class CreationSampler:
    """Fresh noisy copies from the creation schedule, usable as a protocol input sampler."""

    def __init__(self, g: Graph, ec: EdgeColoring, p1: float, p2: float):
        self.sim = CreationSimulator(g, ec)
        self.p1, self.p2 = p1, p2

    @property
    def n(self) -> int:
        return self.sim.n

    def sample(self, rng, size):
        return self.sim.run(self.p1, self.p2, rng, size)


# -- exact distribution ---------------------------------------------------------


def _xor_mix(dist: np.ndarray, weights: list[tuple[float, int]]) -> np.ndarray:
    idx = np.arange(dist.size)
    out = np.zeros_like(dist)
    for w, m in weights:
        out += w * dist[idx ^ m]
    return out


def _pack(bits: np.ndarray) -> int:
    return int(sum(1 << i for i, b in enumerate(bits) if b))


def creation_distribution(g: Graph, ec: EdgeColoring, p1: float, p2: float) -> np.ndarray:
    """Exact distribution over all ``2**n`` syndrome vectors after creation and transmission."""
    if g.n > TABLE_VERTEX_CAP:
        raise ValueError(f"exact distribution limited to {TABLE_VERTEX_CAP} vertices")
    _, masks = gate_toggle_masks(g, ec)
    dist = np.zeros(1 << g.n)
    dist[0] = 1.0
    for gm in masks:
        packed = [_pack(m) for m in gm]
        dist = _xor_mix(dist, [(1.0 - p2, 0)] + [(p2 / 16, m) for m in packed])
    for k in range(g.n):
        nb = sum(1 << u for u in g.neighbors(k))
        toggles = [0, nb, nb ^ (1 << k), 1 << k]
        dist = _xor_mix(dist, [(1.0 - p1, 0)] + [(p1 / 4, m) for m in toggles])
    return dist
