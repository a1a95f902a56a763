"""Update of arbitrary stabilizer-product expectations under one three-copy subprotocol.

Working backwards from the corrected copy, ``(-1)**(sigma1_j sigma2_j)`` expands
into four terms per purified site, giving a sum over submasks ``a1, a2`` of
``a``.  Each two-qubit channel multiplies a term by ``1 - p2`` unless the term's
operators on both touched copies are the identity at that site.  The operators
seen by E02 are ``K_{a,b}`` (copy 0) and ``K_{a2,0}`` (copy 2); pulled back
through the second MCNOT, E01 sees ``K_{a+a2,b}`` (copy 0) and ``K_{a1,0}`` (copy 1).
"""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from .graphs import Bicoloring, CorrelatorIndex, Graph, support_mask


class MissingEntry(KeyError):
    def __init__(self, index: CorrelatorIndex):
        super().__init__(f"expectation table has no entry for mask {index.to_hex()}")
        self.index = index


class ExpectationTable:
    """Expectation values ``<K_{a,b}>`` keyed by :class:`CorrelatorIndex`.

    Either an explicit mapping or a function of the index; reads are recorded
    in ``accessed`` so callers can audit which entries an update touched.
    """

    def __init__(
        self,
        g: Graph,
        col: Bicoloring,
        values: Mapping[CorrelatorIndex, float] | None = None,
        func: Callable[[CorrelatorIndex], float] | None = None,
    ):
        self.g, self.col = g, col
        self._values = dict(values or {})
        self._func = func
        self.accessed: set[CorrelatorIndex] = set()
        for k, v in self._values.items():
            k.check_size(col)
            if not -1.0 - 1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"entry {k.to_hex()}={v} outside [-1, 1]")
        empty = CorrelatorIndex(0, 0)
        if empty in self._values and abs(self._values[empty] - 1.0) > 1e-12:
            raise ValueError("identity entry must equal 1")

    def __getitem__(self, key: CorrelatorIndex) -> float:
        self.accessed.add(key)
        if key.a_mask == 0 and key.b_mask == 0:
            return 1.0
        if key in self._values:
            return self._values[key]
        if self._func is not None:
            return self._func(key)
        raise MissingEntry(key)

    @classmethod
    def product(cls, g: Graph, col: Bicoloring, purity) -> "ExpectationTable":
        """Uncorrelated state: ``<K_{a,b}>`` is the product of single-site purities."""
        p = np.broadcast_to(np.asarray(purity, float), (g.n,))

        def f(c: CorrelatorIndex) -> float:
            m = c.to_vertex_mask(col)
            return float(np.prod([p[v] for v in range(g.n) if m >> v & 1]))

        return cls(g, col, func=f)

    @classmethod
    def from_correlators(cls, g: Graph, col: Bicoloring, corr: np.ndarray) -> "ExpectationTable":
        """From a full array indexed by vertex mask (e.g. a Walsh-Hadamard transform)."""
        corr = np.asarray(corr, float)
        if corr.shape != (1 << g.n,):
            raise ValueError("need one value per vertex mask")
        return cls(g, col, func=lambda c: float(corr[c.to_vertex_mask(col)]))


def _submasks(m: int):
    s = m
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & m


def _popcount(m: int) -> int:
    return bin(m).count("1")


def generalized_p1_update(
    table: ExpectationTable, target: CorrelatorIndex, p2: float = 0.0, color: str = "A"
) -> float:
    """``<K_{a,b}>`` after one subprotocol purifying ``color`` (``a`` is the purified-color mask)."""
    if not 0.0 <= p2 <= 1.0:
        raise ValueError(f"p2={p2} outside [0, 1]")
    g, col = table.g, table.col
    target.check_size(col)
    if color == "A":
        a, b = target.a_mask, target.b_mask
        make = CorrelatorIndex
    else:
        a, b = target.b_mask, target.a_mask
        make = lambda pm, om: CorrelatorIndex(om, pm)  # noqa: E731

    def vmask(pm: int, om: int) -> int:
        return make(pm, om).to_vertex_mask(col)

    supp_cache: dict[int, int] = {}

    def supp(vm: int) -> int:
        if vm not in supp_cache:
            supp_cache[vm] = support_mask(g, vm)
        return supp_cache[vm]

    keep = 1.0 - p2
    total = 0.0
    supp_ab = supp(vmask(a, b))
    for a1 in _submasks(a):
        for a2 in _submasks(a):
            sign = -1.0 if _popcount(a1 & a2) & 1 else 1.0
            term = table[make(a ^ a1 ^ a2, b)] * table[make(a1, b)] * table[make(a2, b)]
            if p2 > 0.0:
                e01 = supp(vmask(a ^ a2, b)) | supp(vmask(a1, 0))
                e02 = supp_ab | supp(vmask(a2, 0))
                term *= keep ** (_popcount(e01) + _popcount(e02))
            total += sign * term
    return total / (1 << _popcount(a))
