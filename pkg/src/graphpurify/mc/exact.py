"""Exhaustive (table-mode) evolution of syndrome distributions on small graphs.

A joint distribution over ``m`` copies of an ``n``-vertex graph is a flat
array of length ``2**(m*n)``; copy ``c`` occupies bits ``c*n .. c*n+n-1`` of the
index.  All steps are exact: MCNOTs permute entries, Pauli channels are
XOR-mixtures, corrections are deterministic maps followed by marginalization.
"""

from __future__ import annotations

import numpy as np

from ..graphs import Bicoloring, Graph, other
from .core import TABLE_VERTEX_CAP, NoiseModel

_XZ = ((0, 0), (1, 0), (1, 1), (0, 1))  # code -> (x, z); 0=I 1=X 2=Y 3=Z


class ExactEvolution:
    def __init__(self, g: Graph, col: Bicoloring, copies: int):
        if g.n * copies > TABLE_VERTEX_CAP:
            raise ValueError(f"table mode limited to {TABLE_VERTEX_CAP} bits, need {g.n * copies}")
        self.g, self.col, self.copies = g, col, copies
        self.n = g.n
        self.full = (1 << g.n) - 1
        self.idx = np.arange(1 << (g.n * copies), dtype=np.int64)

    def mask(self, color: str) -> int:
        return self.col.mask(color)

    def field(self, copy: int) -> np.ndarray:
        return (self.idx >> (copy * self.n)) & self.full

    def product(self, dists) -> np.ndarray:
        out = np.ones(1)
        for d in dists:  # copy 0 ends up in the low bits
            out = np.outer(np.asarray(d, float), out).ravel()
        return out

    def toggle(self, site: int, code: int) -> int:
        x, z = _XZ[code]
        m = 0
        if z:
            m ^= 1 << site
        if x:
            m ^= self.g.neighbor_mask(site)
        return m

    def mcnot(self, dist, color, s, t) -> np.ndarray:
        p, q = self.mask(color), self.mask(other(color))
        cs, ct = self.field(s), self.field(t)
        new_t = ct ^ (cs & p)
        new_s = cs ^ (ct & q)
        j = self.idx ^ ((cs ^ new_s) << (s * self.n)) ^ ((ct ^ new_t) << (t * self.n))
        out = np.empty_like(dist)
        out[j] = dist
        return out

    def _mix(self, dist, weighted_masks) -> np.ndarray:
        out = np.zeros_like(dist)
        for w, m in weighted_masks:
            if w:
                out += w * dist[self.idx ^ m]
        return out

    def pair_noise(self, dist, s, t, p2) -> np.ndarray:
        if p2 <= 0:
            return dist
        for k in range(self.n):
            terms = [(1.0 - p2 + p2 / 16, 0)]
            for pair in range(1, 16):
                m = (self.toggle(k, pair >> 2) << (s * self.n)) ^ (self.toggle(k, pair & 3) << (t * self.n))
                terms.append((p2 / 16, m))
            dist = self._mix(dist, terms)
        return dist

    def single_noise(self, dist, c, p) -> np.ndarray:
        if p <= 0:
            return dist
        for k in range(self.n):
            terms = [(1.0 - p + p / 4, 0)] + [(p / 4, self.toggle(k, code) << (c * self.n)) for code in (1, 2, 3)]
            dist = self._mix(dist, terms)
        return dist

    def marginal(self, dist, copy, new_field=None) -> np.ndarray:
        f = self.field(copy) if new_field is None else new_field
        return np.bincount(f, weights=dist, minlength=1 << self.n)


def correlator(dist: np.ndarray, vertex_mask: int) -> float:
    """``<K>`` for the product of generators in ``vertex_mask`` under a single-copy distribution."""
    parity = _popparity(np.arange(dist.size) & vertex_mask)
    return float(np.sum(dist * (1 - 2 * parity)))


def _popparity(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    out = np.zeros_like(a)
    while a.any():
        out ^= a & 1
        a >>= 1
    return out


def all_correlators(dist: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform: entry ``m`` is ``<K_m>`` for vertex mask ``m``."""
    h = np.asarray(dist, float).copy()
    step = 1
    while step < h.size:
        h = h.reshape(-1, 2, step)
        a, b = h[:, 0, :].copy(), h[:, 1, :].copy()
        h[:, 0, :], h[:, 1, :] = a + b, a - b
        h = h.reshape(-1)
        step *= 2
    return h


def product_distribution(n: int, q) -> np.ndarray:
    q = np.broadcast_to(np.asarray(q, float), (n,))
    dist = np.ones(1)
    for v in range(n):
        dist = np.outer(np.array([1 - q[v], q[v]]), dist).ravel()
    return dist


def three_copy_subprotocol_exact(g, col, dist, noise: NoiseModel, color="A", inputs=None) -> np.ndarray:
    """Output distribution of copy 0 after one noisy three-copy subprotocol."""
    ev = ExactEvolution(g, col, 3)
    joint = ev.product(inputs if inputs is not None else (dist, dist, dist))
    joint = ev.mcnot(joint, color, 0, 1)
    joint = ev.pair_noise(joint, 0, 1, noise.p2)
    joint = ev.mcnot(joint, color, 0, 2)
    joint = ev.pair_noise(joint, 0, 2, noise.p2)
    if noise.measurement_noise:
        joint = ev.single_noise(joint, 1, noise.p2)
        joint = ev.single_noise(joint, 2, noise.p2)
    p = ev.mask(color)
    corrected = ev.field(0) ^ (ev.field(1) & ev.field(2) & p)
    return ev.marginal(joint, 0, corrected)


def postselection_subprotocol_exact(g, col, dist, noise: NoiseModel, color="A") -> tuple[np.ndarray, float]:
    """Normalized accepted distribution of the kept copy, and the acceptance probability."""
    ev = ExactEvolution(g, col, 2)
    joint = ev.product((dist, dist))
    joint = ev.mcnot(joint, color, 0, 1)
    joint = ev.pair_noise(joint, 0, 1, noise.p2)
    if noise.measurement_noise:
        joint = ev.single_noise(joint, 1, noise.p2)
    keep = (ev.field(1) & ev.mask(color)) == 0
    out = ev.marginal(np.where(keep, joint, 0.0), 0)
    acc = float(out.sum())
    return (out / acc if acc > 0 else out), acc


def postselection_rounds_exact(g, col, dist, noise: NoiseModel, rounds: int) -> tuple[list[np.ndarray], list[float]]:
    """Alternate A and B post-selection ``rounds`` times; returns per-round distributions and acceptances."""
    dists, accs = [], []
    for r in range(rounds):
        dist, acc = postselection_subprotocol_exact(g, col, dist, noise, "A" if r % 2 == 0 else "B")
        dists.append(dist)
        accs.append(acc)
    return dists, accs
