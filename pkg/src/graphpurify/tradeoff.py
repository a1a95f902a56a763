"""Regions of the (p1, p2) plane where a bandaid-based protocol helps.

A point is inside a protocol's region when the protocol keeps working there
(no breakdown) and its purified A purity beats the purity of a freshly created
state.  Bandaids are stars of degree ``d`` purified by repeated post-selection;
the bandaid supply breaks down where that iteration collapses instead of
converging.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .graphs import bicolor, edge_color, star
from .mc.core import NoiseModel
from .mc.creation import creation_distribution
from .mc.exact import all_correlators, postselection_subprotocol_exact
from .recursion import (
    ParameterError,
    bandaid_map,
    conditional_bandaid_maps,
    creation_purity,
    postselection_bandaid_quality,
)

PROTOCOLS = ("bandaid", "conditional")
SOURCES = ("linear", "exact")
COLLAPSE = 1e-3


@dataclass(frozen=True)
class StarSupply:
    converged: bool
    purity: float
    rounds: int


@lru_cache(maxsize=4096)
def star_supply(d: int, p1: float, p2: float, max_rounds: int = 4000, tol: float = 1e-12) -> StarSupply:
    """Iterate exact post-selection (A then B) on created star bandaids until the minimum purity settles."""
    g = star(d)
    col = bicolor(g)
    dist = creation_distribution(g, edge_color(g), p1, p2)
    noise = NoiseModel(p1, p2, True)
    prev = None
    m = 1.0
    for r in range(max_rounds):
        for c in "AB":
            dist, _ = postselection_subprotocol_exact(g, col, dist, noise, c)
        corr = all_correlators(dist)
        m = float(min(corr[1 << v] for v in range(g.n)))
        if m < COLLAPSE:
            return StarSupply(False, m, r + 1)
        if prev is not None and abs(m - prev) < tol:
            return StarSupply(True, m, r + 1)
        prev = m
    return StarSupply(True, m, max_rounds)


def bandaid_purity(d: int, p1: float, p2: float, source: str = "linear") -> float:
    if source == "linear":
        return postselection_bandaid_quality(d, p2)
    if source == "exact":
        s = star_supply(d, p1, p2)
        return s.purity if s.converged else 0.0
    raise ParameterError(f"unknown bandaid source {source!r}")


def purified_value(protocol: str, d: int, p1: float, p2: float, source: str = "linear") -> float:
    """Final A purity the protocol settles at (neither map remembers the input purity)."""
    xb = bandaid_purity(d, p1, p2, source)
    if protocol == "bandaid":
        return bandaid_map("A", d, p2, xb, "full")(1.0)
    if protocol == "conditional":
        return conditional_bandaid_maps(d, p2, xb).bound_fixed_point()[0]
    raise ParameterError(f"unknown protocol {protocol!r}")


def _bisect(ok, lo: float, hi: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def supply_breakdown_p1(d: int, p2: float, p1_max: float = 0.5, tol: float = 1e-4) -> float:
    """Largest p1 at which the star supply still converges (0 if it fails already at p1 = 0)."""
    ok = lambda p1: star_supply(d, round(p1, 12), p2).converged  # noqa: E731
    if not ok(0.0):
        return 0.0
    if ok(p1_max):
        return p1_max
    return _bisect(ok, 0.0, p1_max, tol)


def supply_breakdown_p2(d: int, p2_max: float = 0.1, tol: float = 1e-5) -> float:
    ok = lambda p2: star_supply(d, 0.0, round(p2, 12)).converged  # noqa: E731
    return _bisect(ok, 0.0, p2_max, tol)


def conditional_crossover_p2(d: int, p2_max: float = 0.05, grid: int = 400) -> float:
    """Where the bound's attractor falls fastest with p2.

    The bound has a single attractor at every p2, so there is no bistability
    to lose; its sharp drop is taken as the conditional protocol's breakdown.
    """
    ps = np.linspace(0.0, p2_max, grid + 1)
    fp = np.array([purified_value("conditional", d, 0.0, p) for p in ps])
    slope = np.gradient(fp, ps)
    i = int(np.argmin(slope))
    if i == 0 or i == grid:
        raise ValueError("no interior crossover in the scanned range")
    # vertex of the parabola through the three slope samples around the minimum
    s0, s1, s2 = slope[i - 1], slope[i], slope[i + 1]
    den = s0 - 2 * s1 + s2
    shift = 0.5 * (s0 - s2) / den if den != 0 else 0.0
    return float(ps[i] + shift * (ps[1] - ps[0]))


def advantage_p1(protocol: str, d: int, p2: float, source: str = "linear") -> float:
    """Smallest p1 at which the protocol's output beats an unpurified state (nan if never within [0, 1))."""
    target = purified_value(protocol, d, 0.0, p2, source)
    if source == "exact":
        raise ParameterError("advantage boundary uses a p1-independent source; pick 'linear'")
    h = lambda p1: creation_purity(d, p1, p2) - target  # noqa: E731
    if h(0.0) <= 0:
        return 0.0
    if h(1.0) > 0:
        return float("nan")
    return float(brentq(h, 0.0, 1.0, xtol=1e-12))


@dataclass
class TradeoffCurve:
    protocol: str
    d: int
    p1_intercept: float
    p2_intercept: float
    breakdown: list[tuple[float, float]]
    advantage: list[tuple[float, float]]
    rows: list[dict] = field(default_factory=list)

    def area(self) -> float:
        """Area between the advantage and breakdown curves over the sampled p2 values."""
        p2 = np.array([b[0] for b in self.breakdown])
        hi = np.array([b[1] for b in self.breakdown])
        lo = np.array([a[1] for a in self.advantage])
        lo = np.where(np.isnan(lo), np.inf, lo)
        width = np.clip(hi - lo, 0.0, None)
        return float(np.sum(0.5 * (width[1:] + width[:-1]) * np.diff(p2)))

    def contains(self, p1: float, p2: float) -> bool:
        p2s = [b[0] for b in self.breakdown]
        if p2 > p2s[-1] or p2 > self.p2_intercept:
            return False
        hi = float(np.interp(p2, p2s, [b[1] for b in self.breakdown]))
        lo = float(np.interp(p2, p2s, [a[1] for a in self.advantage]))
        return lo < p1 < hi

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def tradeoff_region(
    protocol: str,
    d: int = 4,
    p2_grid=None,
    p1_grid=None,
    source: str = "linear",
    tol: float = 1e-4,
) -> TradeoffCurve:
    """Breakdown and advantage curves of ``protocol`` sampled along ``p2_grid``.

    If ``p1_grid`` is given, each (p1, p2) pair is also tabulated in ``rows``.
    """
    if protocol not in PROTOCOLS:
        raise ParameterError(f"unknown protocol {protocol!r}")
    if source not in SOURCES:
        raise ParameterError(f"unknown bandaid source {source!r}")
    supply_p2 = supply_breakdown_p2(d, tol=tol / 10)
    p2_cut = supply_p2 if protocol == "bandaid" else min(supply_p2, conditional_crossover_p2(d))
    if p2_grid is None:
        p2_grid = np.linspace(0.0, p2_cut, 9)
    p2_grid = sorted(float(p) for p in p2_grid)
    breakdown, advantage = [], []
    for p2 in p2_grid:
        hi = supply_breakdown_p1(d, p2, tol=tol) if p2 <= p2_cut else 0.0
        breakdown.append((p2, hi))
        advantage.append((p2, advantage_p1(protocol, d, p2) if p2 <= p2_cut else float("nan")))
    curve = TradeoffCurve(protocol, d, breakdown[0][1] if p2_grid[0] == 0.0 else float("nan"), p2_cut, breakdown, advantage)
    for p2 in p2_grid if p1_grid is not None else ():
        for p1 in p1_grid:
            p1 = float(p1)
            alive = p2 <= p2_cut and star_supply(d, p1, p2).converged
            purified = purified_value(protocol, d, p1, p2, source) if alive else float("nan")
            unpurified = creation_purity(d, p1, p2)
            curve.rows.append(
                {
                    "p1": p1,
                    "p2": p2,
                    "unpurified": unpurified,
                    "purified": purified,
                    "in_region": bool(alive and purified > unpurified),
                }
            )
    return curve
