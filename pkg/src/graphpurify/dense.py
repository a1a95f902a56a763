"""Small dense density-matrix simulator for checking graph-basis claims on a few qubits.

Basis index bit ``q`` is qubit ``q``.  Paulis, CNOTs and CPHASEs act through
index permutations and sign vectors instead of full matrix products, so the
largest object (three copies of a 3-vertex graph, 512 x 512) stays cheap.
Multi-copy registers place copy ``c`` vertex ``v`` on qubit ``c * n + v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Sequence

import numpy as np

from .graphs import A, B, Bicoloring, Graph, other
from .mc.core import NoiseModel

MAX_QUBITS = 10
MAX_D_VERTICES = 5
TOL = 1e-10


class SizeCapExceeded(ValueError):
    pass


def _cap(nq: int, limit: int = MAX_QUBITS) -> None:
    if nq > limit:
        raise SizeCapExceeded(f"{nq} qubits exceeds the cap of {limit}")


def _parity(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    out = np.zeros_like(a)
    while a.any():
        out ^= a & 1
        a >>= 1
    return out


@dataclass(frozen=True)
class PauliOp:
    """``X^x Z^z`` on bitmasks ``x`` and ``z`` (Y sites carry a global phase, irrelevant under conjugation)."""

    x: int
    z: int


@dataclass
class DensityMatrix:
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        dim = self.data.shape[0]
        if self.data.shape != (dim, dim) or dim & (dim - 1):
            raise ValueError("density matrix must be square with power-of-two dimension")
        _cap(self.n)

    @property
    def n(self) -> int:
        return self.data.shape[0].bit_length() - 1

    def check(self, tol: float = TOL) -> None:
        r = self.data
        if np.max(np.abs(r - r.conj().T)) > tol:
            raise ValueError("not Hermitian")
        if abs(np.trace(r) - 1) > tol:
            raise ValueError("trace differs from 1")
        if np.linalg.eigvalsh((r + r.conj().T) / 2).min() < -tol:
            raise ValueError("negative eigenvalue")


@dataclass(frozen=True)
class KrausChannel:
    """Mixture of unitaries: ``rho -> sum_i w_i U_i rho U_i^dagger``."""

    terms: tuple

    def __post_init__(self):
        w = [t[0] for t in self.terms]
        if any(x < 0 for x in w) or abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("channel weights must be nonnegative and sum to 1")


# -- primitive actions -------------------------------------------------------------


def _idx(dim: int) -> np.ndarray:
    return np.arange(dim, dtype=np.int64)


def conj_pauli(rho: np.ndarray, p: PauliOp) -> np.ndarray:
    i = _idx(rho.shape[0])
    s = 1 - 2 * _parity((i ^ p.x) & p.z)
    src = i ^ p.x
    return (s[:, None] * s[None, :]) * rho[np.ix_(src, src)]


def left_pauli(rho: np.ndarray, p: PauliOp) -> np.ndarray:
    """``(X^x Z^z) rho``."""
    i = _idx(rho.shape[0])
    src = i ^ p.x
    s = 1 - 2 * _parity(src & p.z)
    return s[:, None] * rho[src, :]


def conj_permutation(rho: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """``U rho U^dagger`` for the basis permutation ``U|i> = |perm[i]>``."""
    out = np.empty_like(rho)
    out[np.ix_(perm, perm)] = rho
    return out


def cnot_perm(dim: int, control: int, target: int) -> np.ndarray:
    i = _idx(dim)
    return i ^ (((i >> control) & 1) << target)


def pauli_expectation(rho: np.ndarray, p: PauliOp) -> complex:
    i = _idx(rho.shape[0])
    s = 1 - 2 * _parity(i & p.z)
    return complex(np.sum(s * rho[i, i ^ p.x]))


def apply_channel(rho, ch: KrausChannel) -> np.ndarray:
    r = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, complex)
    out = np.zeros_like(r)
    for w, u in ch.terms:
        if w == 0:
            continue
        if isinstance(u, PauliOp):
            out += w * conj_pauli(r, u)
        else:
            u = np.asarray(u, complex)
            if u.shape != r.shape:
                raise ValueError("channel and state dimensions differ")
            out += w * (u @ r @ u.conj().T)
    return out


_CODE_XZ = ((0, 0), (1, 0), (1, 1), (0, 1))  # I X Y Z


def single_depolarizing(q: int, p: float) -> KrausChannel:
    terms = [(1.0 - p + p / 4, PauliOp(0, 0))]
    for code in (1, 2, 3):
        x, z = _CODE_XZ[code]
        terms.append((p / 4, PauliOp(x << q, z << q)))
    return KrausChannel(tuple(terms))


def two_qubit_depolarizing(q1: int, q2: int, p: float) -> KrausChannel:
    terms = [(1.0 - p + p / 16, PauliOp(0, 0))]
    for c1, c2 in iproduct(range(4), range(4)):
        if c1 == 0 and c2 == 0:
            continue
        (x1, z1), (x2, z2) = _CODE_XZ[c1], _CODE_XZ[c2]
        terms.append((p / 16, PauliOp((x1 << q1) | (x2 << q2), (z1 << q1) | (z2 << q2))))
    return KrausChannel(tuple(terms))


# -- graph states -------------------------------------------------------------------------


def generator(g: Graph, v: int, offset: int = 0) -> PauliOp:
    return PauliOp(1 << (v + offset), g.neighbor_mask(v) << offset)


def graph_state_vector(g: Graph, mu: Sequence[int]) -> np.ndarray:
    _cap(g.n)
    if len(mu) != g.n:
        raise ValueError("syndrome vector size mismatch")
    i = _idx(1 << g.n)
    phase = np.zeros(i.size, dtype=np.int64)
    for u, v in g.edges:
        phase ^= ((i >> u) & (i >> v)) & 1
    zmask = sum(1 << v for v, m in enumerate(mu) if m)
    phase ^= _parity(i & zmask)
    return (1 - 2 * phase) / np.sqrt(i.size)


def graph_state(g: Graph, mu: Sequence[int]) -> DensityMatrix:
    psi = graph_state_vector(g, mu)
    return DensityMatrix(np.outer(psi, psi.conj()))


def stabilizer_expectation(g: Graph, rho, vertex_mask: int, offset: int = 0) -> float:
    r = rho.data if isinstance(rho, DensityMatrix) else rho
    m = r
    for v in range(g.n):
        if vertex_mask >> v & 1:
            m = left_pauli(m, generator(g, v, offset))
    return float(np.real(np.trace(m)))


def depolarize_D(g: Graph, col: Bicoloring, rho) -> np.ndarray:
    """Project onto the graph-basis diagonal: product of ``(rho + K rho K) / 2`` over generators."""
    _cap(g.n, MAX_D_VERTICES)
    r = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, complex)
    if r.shape[0] != 1 << g.n:
        raise ValueError("state does not match the graph")
    for v in list(col.a_vertices) + list(col.b_vertices):
        r = 0.5 * (r + conj_pauli(r, generator(g, v)))
    return r


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    dim = 1 << n
    k = rank or dim
    gm = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    r = gm @ gm.conj().T
    return r / np.trace(r)


# -- protocol pieces ---------------------------------------------------------------------------


def mcnot_dense(g: Graph, col: Bicoloring, color: str, rho: np.ndarray, s: int, t: int) -> np.ndarray:
    """Transversal CNOTs between copies ``s`` and ``t`` of a multi-copy register.

    Purified-color sites: control on copy ``t``, target on copy ``s``;
    other sites: control on ``s``, target on ``t``.
    """
    n = g.n
    dim = rho.shape[0]
    for v in col.vertices(color):
        rho = conj_permutation(rho, cnot_perm(dim, t * n + v, s * n + v))
    for v in col.vertices(other(color)):
        rho = conj_permutation(rho, cnot_perm(dim, s * n + v, t * n + v))
    return rho


def _pair_noise(rho, n, s, t, p2):
    if p2 <= 0:
        return rho
    for v in range(n):
        rho = apply_channel(rho, two_qubit_depolarizing(s * n + v, t * n + v, p2))
    return rho


def _kron_copies(states) -> np.ndarray:
    out = np.ones((1, 1), complex)
    for r in states:  # copy 0 in the low bits
        out = np.kron(np.asarray(r, complex), out)
    return out


def run_P1_dense(g: Graph, col: Bicoloring, rho, noise: NoiseModel = NoiseModel(), color: str = A) -> np.ndarray:
    """One three-copy subprotocol on ``rho`` (or a triple of states), outcomes summed.

    Copies 1 and 2 are measured through the coarse projectors onto the
    eigenspaces of their purified-color generators, copy 0 is corrected by
    ``Z_j`` where both syndromes read 1, and copies 1 and 2 are traced out.
    """
    n = g.n
    _cap(3 * n)
    states = rho if isinstance(rho, (tuple, list)) else (rho, rho, rho)
    states = [s.data if isinstance(s, DensityMatrix) else s for s in states]
    big = _kron_copies(states)
    big = mcnot_dense(g, col, color, big, 0, 1)
    big = _pair_noise(big, n, 0, 1, noise.p2)
    big = mcnot_dense(g, col, color, big, 0, 2)
    big = _pair_noise(big, n, 0, 2, noise.p2)
    if noise.measurement_noise and noise.p2 > 0:
        for q in range(n, 3 * n):
            big = apply_channel(big, single_depolarizing(q, noise.p2))

    targets = col.vertices(color)
    d0 = 1 << n
    out = np.zeros((d0, d0), complex)
    for s1 in iproduct((0, 1), repeat=len(targets)):
        for s2 in iproduct((0, 1), repeat=len(targets)):
            m = big
            for copy, sig in ((1, s1), (2, s2)):
                for v, bit in zip(targets, sig):
                    k = left_pauli(m, generator(g, v, copy * n))
                    m = 0.5 * (m + k) if bit == 0 else 0.5 * (m - k)
            red = np.einsum("abcabd->cd", m.reshape(d0, d0, d0, d0, d0, d0))
            zmask = sum(1 << v for v, b1, b2 in zip(targets, s1, s2) if b1 and b2)
            out += conj_pauli(red, PauliOp(0, zmask)) if zmask else red
    return out


def check_commutation(g: Graph, col: Bicoloring, rho, noise: NoiseModel = NoiseModel()) -> float:
    r = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, complex)
    lhs = run_P1_dense(g, col, depolarize_D(g, col, r), noise)
    rhs = depolarize_D(g, col, run_P1_dense(g, col, r, noise))
    return float(np.max(np.abs(lhs - rhs)))
