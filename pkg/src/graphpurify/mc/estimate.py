"""Correlator estimation over deterministic, batch-parallel sample streams."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..graphs import Bicoloring, CorrelatorIndex

DEFAULT_BATCH = 50_000

# a protocol run maps (rng, batch_size) to either a (n, S) bool array or
# a pair (array, accepted_mask) for post-selecting protocols
ProtocolRun = Callable[[np.random.Generator, int], object]


@dataclass
class CorrelatorEstimate:
    correlator: str
    mean: float
    stderr: float
    samples: int


@dataclass
class EstimateReport:
    estimates: list[CorrelatorEstimate]
    metadata: dict = field(default_factory=dict)
    accepted: int | None = None
    attempted: int | None = None

    def __getitem__(self, key: str) -> CorrelatorEstimate:
        for e in self.estimates:
            if e.correlator == key:
                return e
        raise KeyError(key)

    @property
    def acceptance_rate(self) -> float | None:
        if self.attempted is None:
            return None
        return self.accepted / self.attempted if self.attempted else 0.0

    def to_json(self) -> str:
        payload = {
            "metadata": self.metadata,
            "estimates": [e.__dict__ for e in self.estimates],
        }
        if self.attempted is not None:
            payload["accepted"] = self.accepted
            payload["attempted"] = self.attempted
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["correlator", "mean", "stderr", "samples"])
        for e in self.estimates:
            w.writerow([e.correlator, repr(e.mean), repr(e.stderr), e.samples])
        return buf.getvalue()


def batch_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one batch; independent of how batches are spread over workers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def _parity_rows(n: int, masks: Sequence[int]) -> list[np.ndarray]:
    return [np.array([v for v in range(n) if m >> v & 1], dtype=np.intp) for m in masks]


def _run_batch(run: ProtocolRun, seed: int, index: int, size: int, rows: list[np.ndarray]):
    out = run(batch_rng(seed, index), size)
    if isinstance(out, tuple):
        state, accepted = out
        state = state[:, accepted]
        attempted = size
    else:
        state, attempted = out, None
    sums = []
    for r in rows:
        if r.size == 0:
            sums.append(state.shape[1])
            continue
        parity = np.bitwise_xor.reduce(state[r], axis=0)
        sums.append(state.shape[1] - 2 * int(np.count_nonzero(parity)))
    return state.shape[1], attempted, sums


def estimate_correlators(
    run: ProtocolRun,
    correlators: Sequence[CorrelatorIndex | int],
    samples: int,
    seed: int,
    n: int,
    col: Bicoloring | None = None,
    workers: int = 1,
    batch_size: int = DEFAULT_BATCH,
    metadata: dict | None = None,
) -> EstimateReport:
    """Sample means of ``(-1)**parity`` over each correlator's masked syndrome bits.

    ``samples`` counts protocol attempts; for post-selecting runs only accepted
    outputs enter the means.  Correlators may be vertex bitmasks or
    :class:`CorrelatorIndex` values (the latter need ``col``).
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    masks, labels = [], []
    for c in correlators:
        if isinstance(c, CorrelatorIndex):
            if col is None:
                raise ValueError("CorrelatorIndex needs a coloring")
            c.check_size(col)
            masks.append(c.to_vertex_mask(col))
            labels.append(c.to_hex())
        else:
            masks.append(int(c))
            labels.append(f"v{int(c):x}")
    rows = _parity_rows(n, masks)
    sizes = [batch_size] * (samples // batch_size)
    if samples % batch_size:
        sizes.append(samples % batch_size)

    jobs = list(enumerate(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _run_batch(run, seed, job[0], job[1], rows), jobs))
    else:
        results = [_run_batch(run, seed, i, s, rows) for i, s in jobs]

    kept = sum(r[0] for r in results)
    totals = np.zeros(len(rows), dtype=np.int64)
    for r in results:
        totals += np.asarray(r[2], dtype=np.int64)
    estimates = []
    for label, total in zip(labels, totals):
        if kept == 0:
            estimates.append(CorrelatorEstimate(label, float("nan"), float("nan"), 0))
            continue
        mean = float(total) / kept
        var = max(0.0, 1.0 - mean * mean) * (kept / (kept - 1) if kept > 1 else 0.0)
        estimates.append(CorrelatorEstimate(label, mean, float(np.sqrt(var / kept)), kept))
    post = results[0][1] is not None
    meta = dict(metadata or {})
    meta.update(seed=seed, samples=samples, batch_size=batch_size)
    return EstimateReport(
        estimates,
        meta,
        accepted=kept if post else None,
        attempted=samples if post else None,
    )
