"""Monte Carlo rounds of the purification protocols on batches of syndrome vectors.

Every round function takes a :class:`GraphContext`, a sampler for fresh input
copies, a :class:`NoiseModel`, a numpy ``Generator`` and a batch size, and
returns the kept copy as an ``(n, S)`` boolean array.  Noisy MCNOTs are an ideal
MCNOT followed by a two-qubit depolarizing channel on every site.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ..graphs import A, B, other
from .core import (
    BandaidSpec,
    GraphContext,
    NoiseModel,
    apply_mcnot,
    depolarize_pair_layer,
    hit_positions,
    measure_syndrome,
    toggle_sites,
)

_X_PART = np.array([0, 1, 1, 0], dtype=bool)
_Z_PART = np.array([0, 0, 1, 1], dtype=bool)


class DegreeMismatch(ValueError):
    pass


def _warn_irregular(ctx: GraphContext) -> None:
    if not ctx.g.is_regular():
        warnings.warn("graph is not degree-regular; closed-form maps use the maximum degree", stacklevel=3)


# -- three-copy ----------------------------------------------------------------


def three_copy_subprotocol(ctx, color, c0, c1, c2, noise: NoiseModel, rng) -> np.ndarray:
    """Purify ``color`` on ``c0`` using ``c1`` and ``c2`` (all modified in place)."""
    apply_mcnot(ctx, color, c0, c1)
    depolarize_pair_layer(ctx, c0, c1, noise.p2, rng)
    apply_mcnot(ctx, color, c0, c2)
    depolarize_pair_layer(ctx, c0, c2, noise.p2, rng)
    ideal = replace(noise, measurement_noise=False)
    s1 = measure_syndrome(ctx, c1, color, ideal, rng)
    s2 = measure_syndrome(ctx, c2, color, ideal, rng)
    c0[ctx.idx[color]] ^= s1 & s2
    return c0


def run_three_copy_round(ctx, sampler, noise, rng, size, stage="full") -> np.ndarray:
    """P1 (purify A) then P2 (purify B); nine fresh copies per output for ``stage='full'``."""
    _warn_irregular(ctx)

    def p1():
        return three_copy_subprotocol(ctx, A, *(sampler.sample(rng, size) for _ in range(3)), noise, rng)

    if stage == "P1":
        return p1()
    if stage == "P2":
        return three_copy_subprotocol(ctx, B, *(sampler.sample(rng, size) for _ in range(3)), noise, rng)
    return three_copy_subprotocol(ctx, B, p1(), p1(), p1(), noise, rng)


# -- post-selection --------------------------------------------------------------


def postselection_subprotocol(ctx, color, c0, c1, noise, rng):
    apply_mcnot(ctx, color, c0, c1)
    depolarize_pair_layer(ctx, c0, c1, noise.p2, rng)
    s1 = measure_syndrome(ctx, c1, color, noise, rng)
    return c0, ~s1.any(axis=0)


def run_postselection_round(ctx, sampler, noise, rng, size, color=A):
    """One post-selection subprotocol; returns ``(kept_copy, accepted)``.

    Rejected columns are returned as-is and must be dropped by the caller.
    """
    return postselection_subprotocol(ctx, color, sampler.sample(rng, size), sampler.sample(rng, size), noise, rng)


# -- bandaids ----------------------------------------------------------------------


def _schedule(ctx, color, bandaid: BandaidSpec, rng, size) -> np.ndarray:
    """Vertex applied at each step, shape ``(|color|, S)``."""
    targets = ctx.idx[color]
    if bandaid.schedule == "uniform_random":
        order = np.argsort(rng.random((targets.size, size)), axis=0)
        return targets[order]
    sched = np.array([v for v in bandaid.schedule if v in set(targets.tolist())], dtype=np.intp)
    if sorted(sched.tolist()) != sorted(targets.tolist()):
        raise ValueError("fixed schedule must cover every target vertex exactly once")
    return np.repeat(sched[:, None], size, axis=1)


def _check_bandaid_degree(ctx) -> int:
    if ctx.nbr_table is None:
        raise DegreeMismatch("bandaid protocols need a degree-regular graph")
    return ctx.nbr_table.shape[1]


def apply_bandaids(ctx, state, v, cols, purity, noise: NoiseModel, rng) -> None:
    """Apply one star bandaid centered at ``v[i]`` in column ``cols[i]`` for each i.

    Center over ``v``, leaf ``l`` over the ``l``-th neighbor of ``v``.  Syndrome
    flow: center ^= mu_v, mu_neighbor ^= leaf.  The syndrome is the parity of the
    measured bandaid (its center generator) and corrects mu_v.
    """
    m = cols.size
    if m == 0:
        return
    d = ctx.nbr_table.shape[1]
    qb = (1.0 - purity) / 2.0
    center = rng.random(m) < qb
    leaves = rng.random((d, m)) < qb
    nb = ctx.nbr_table[v].T  # (d, m)

    center ^= state[v, cols]
    state[nb, cols[None, :]] ^= leaves

    if noise.p2 > 0:
        # channel on (large v, center)
        h = hit_positions(rng, m, noise.p2)
        if h.size:
            pair = rng.integers(0, 16, h.size)
            toggle_sites(ctx, state, v[h], cols[h], pair >> 2)
            pb = pair & 3
            center[h] ^= _Z_PART[pb]
            leaves[:, h] ^= _X_PART[pb][None, :]
        # channels on (large neighbor l, leaf l)
        for l in range(d):
            h = hit_positions(rng, m, noise.p2)
            if h.size:
                pair = rng.integers(0, 16, h.size)
                toggle_sites(ctx, state, nb[l, h], cols[h], pair >> 2)
                pb = pair & 3
                leaves[l, h] ^= _Z_PART[pb]
                center[h] ^= _X_PART[pb]
    sigma = center
    if noise.measurement_noise and noise.p2 > 0:
        # X-basis readout of the center flips on Z/Y, Z-basis readout of a leaf on X/Y
        sigma = sigma ^ (np.count_nonzero(rng.random((d + 1, m)) < noise.p2 / 2, axis=0) & 1).astype(bool)
    state[v, cols] ^= sigma


def bandaid_subprotocol(ctx, color, state, bandaid: BandaidSpec, noise, rng) -> np.ndarray:
    size = state.shape[1]
    sched = _schedule(ctx, color, bandaid, rng, size)
    cols = np.arange(size)
    for step in sched:
        apply_bandaids(ctx, state, step, cols, bandaid.purity, noise, rng)
    return state


def run_bandaid_round(ctx, sampler, bandaid: BandaidSpec, noise, rng, size, stage="full") -> np.ndarray:
    d = _check_bandaid_degree(ctx)
    state = sampler.sample(rng, size)
    if stage in ("P1", "full"):
        bandaid_subprotocol(ctx, A, state, bandaid, noise, rng)
    if stage in ("P2", "full"):
        bandaid_subprotocol(ctx, B, state, bandaid, noise, rng)
    return state


# -- conditional bandaids ------------------------------------------------------------


def conditional_subprotocol(ctx, color, c0, c1, bandaid: BandaidSpec, noise, rng, detections=None) -> np.ndarray:
    apply_mcnot(ctx, color, c0, c1)
    depolarize_pair_layer(ctx, c0, c1, noise.p2, rng)
    sigma = measure_syndrome(ctx, c1, color, noise, rng)  # rows follow ctx.idx[color]
    if detections is not None:
        detections.append(sigma.copy())
    size = c0.shape[1]
    row_of = {int(v): i for i, v in enumerate(ctx.idx[color])}
    row_lookup = np.zeros(ctx.n, dtype=np.intp)
    for v, i in row_of.items():
        row_lookup[v] = i
    sched = _schedule(ctx, color, bandaid, rng, size)
    all_cols = np.arange(size)
    for step in sched:
        fire = sigma[row_lookup[step], all_cols]
        cols = all_cols[fire]
        apply_bandaids(ctx, c0, step[fire], cols, bandaid.purity, noise, rng)
    return c0


def run_conditional_bandaid_round(ctx, sampler, bandaid: BandaidSpec, noise, rng, size, stage="full") -> np.ndarray:
    _check_bandaid_degree(ctx)

    def sub(color):
        return conditional_subprotocol(ctx, color, sampler.sample(rng, size), sampler.sample(rng, size), bandaid, noise, rng)

    if stage == "P1":
        return sub(A)
    if stage == "P2":
        return sub(B)
    return conditional_subprotocol(ctx, B, sub(A), sub(A), bandaid, noise, rng)


# -- composition ------------------------------------------------------------------------


@dataclass
class RoundSampler:
    """A protocol round whose outputs serve as fresh input copies for another round."""

    ctx: GraphContext
    round_fn: Callable[..., np.ndarray]
    inner: object
    kwargs: dict

    @property
    def n(self) -> int:
        return self.ctx.n

    def sample(self, rng, size):
        return self.round_fn(self.ctx, self.inner, rng=rng, size=size, **self.kwargs)


def concatenated_three_copy(ctx, base_sampler, noise, levels: int):
    """Sampler for ``levels`` concatenated three-copy rounds (9**levels base copies per output)."""
    s = base_sampler
    for _ in range(levels):
        s = RoundSampler(ctx, run_three_copy_round, s, {"noise": noise})
    return s
