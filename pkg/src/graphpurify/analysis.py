"""Fixed points, stability, thresholds and related checks for one-point maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .generalized import ExpectationTable, generalized_p1_update
from .graphs import CorrelatorIndex, bicolor, ring, torus
from .recursion import alpha as alpha_of, bandaid_map, three_copy_map

Map = Callable[[float], float]

ATTRACTIVE, REPULSIVE, MARGINAL = "attractive", "repulsive", "marginal"


class InvalidFamily(ValueError):
    pass


@dataclass(frozen=True)
class FixedPoint:
    location: float
    stability: str
    derivative: float


@dataclass
class FixedPointReport:
    fixed_points: list[FixedPoint]
    spec: dict = field(default_factory=dict)

    @property
    def locations(self) -> list[float]:
        return [p.location for p in self.fixed_points]

    def attractive(self) -> list[FixedPoint]:
        return [p for p in self.fixed_points if p.stability == ATTRACTIVE]

    def interior(self, eps: float = 1e-9) -> list[FixedPoint]:
        return [p for p in self.fixed_points if eps < p.location < 1 - eps]


def derivative(f: Map, x: float, lo: float, hi: float, h: float = 1e-6) -> float:
    if x - h < lo:
        return (f(x + h) - f(x)) / h
    if x + h > hi:
        return (f(x) - f(x - h)) / h
    return (f(x + h) - f(x - h)) / (2 * h)


def classify(slope: float, band: float = 1e-6) -> str:
    if abs(slope) < 1 - band:
        return ATTRACTIVE
    if abs(slope) > 1 + band:
        return REPULSIVE
    return MARGINAL


def find_fixed_points(
    f: Map,
    interval: tuple[float, float] = (0.0, 1.0),
    tol: float = 1e-10,
    grid: int = 10_000,
    spec: dict | None = None,
) -> FixedPointReport:
    """All solutions of ``f(x) = x`` found by a sign-change scan plus bracketed refinement."""
    lo, hi = interval
    xs = np.linspace(lo, hi, grid + 1)
    hs = np.array([f(x) - x for x in xs])
    roots: list[float] = []
    for i, (x, h) in enumerate(zip(xs, hs)):
        if abs(h) <= 1e-12:
            roots.append(float(x))
        elif i + 1 < len(xs) and h * hs[i + 1] < 0 and abs(hs[i + 1]) > 1e-12:
            roots.append(brentq(lambda t: f(t) - t, x, xs[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps))
    points: list[FixedPoint] = []
    for r in sorted(roots):
        if points and abs(r - points[-1].location) < 1e-8:
            continue
        if abs(f(r) - r) > 1e-9:
            continue
        s = derivative(f, r, lo, hi)
        points.append(FixedPoint(r, classify(s), s))
    return FixedPointReport(points, dict(spec or {}))


def concatenation_trace(f: Map, x0: float, k: int) -> list[float]:
    if not 0.0 <= x0 <= 1.0:
        raise ValueError("x0 must lie in [0, 1]")
    out = [x0]
    for _ in range(k):
        out.append(f(out[-1]))
    return out


# -- thresholds ------------------------------------------------------------------------------


def has_nontrivial_attractor(f: Map, floor: float = 1e-3, grid: int = 2000) -> bool:
    """Whether ``f`` keeps some ``x > floor`` from decreasing (``max (f(x) - x) >= 0``).

    For maps with at most one repulsive interior point below a stable upper
    point this is equivalent to the existence of a nontrivial attractor; the
    maximum is refined locally so that nearly touching roots are not missed.
    """
    xs = np.linspace(floor, 1.0, grid + 1)
    hs = np.array([f(x) - x for x in xs])
    i = int(np.argmax(hs))
    if hs[i] >= 0:
        return True
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid)]
    res = minimize_scalar(lambda t: -(f(t) - t), bounds=(a, b), method="bounded", options={"xatol": 1e-13})
    return -res.fun >= 0


def _as_maps(m) -> list[Map]:
    return list(m) if isinstance(m, (list, tuple)) else [m]


@dataclass
class ThresholdResult:
    p_th: float
    lower: float
    upper: float
    spec: dict = field(default_factory=dict)


def threshold_scan(
    family: Callable[[float], Map | Sequence[Map]],
    p_max: float = 0.1,
    tol: float = 1e-6,
    coarse: int = 40,
    spec: dict | None = None,
) -> ThresholdResult:
    """Largest parameter for which every map of the family keeps a nontrivial attractor."""

    def ok(p: float) -> bool:
        return all(has_nontrivial_attractor(m) for m in _as_maps(family(p)))

    if not ok(0.0):
        raise InvalidFamily("no nontrivial attractive fixed point at zero noise")
    ps = np.linspace(0.0, p_max, coarse + 1)
    flags = [ok(p) for p in ps]
    if all(flags):
        raise InvalidFamily(f"family still purifies at the scan limit {p_max}")
    first_bad = flags.index(False)
    if any(flags[first_bad:]):
        raise InvalidFamily("purification region is not an interval in the scanned parameter")
    lo, hi = ps[first_bad - 1], ps[first_bad]
    while hi - lo > tol / 4:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return ThresholdResult(0.5 * (lo + hi), lo, hi, dict(spec or {}))


def three_copy_family(d: int) -> Callable[[float], list[Map]]:
    return lambda p2: [three_copy_map("A", "full", d, p2), three_copy_map("B", "full", d, p2)]


def three_copy_alpha_maps(a: float) -> list[Map]:
    """Composed three-copy branches written in terms of ``alpha`` alone."""
    return [
        lambda x: a**8 / 8 * (2 + 1 / a - x * x) ** 3 * x**3,
        lambda x: a**4 / 2 * (2 + 1 / a - a**4 * x**6) * x**3,
    ]


def alpha_threshold(tol: float = 1e-7) -> float:
    """Smallest ``alpha`` at which the composed three-copy maps keep their upper attractor."""
    res = threshold_scan(lambda q: three_copy_alpha_maps(1.0 - q), p_max=0.05, tol=tol)
    return 1.0 - res.p_th


def p_threshold_from_alpha(alpha_th: float, d: int) -> float:
    return 1.0 - alpha_th ** (1.0 / (d + 1))


# -- Descartes ------------------------------------------------------------------------------------


def descartes_sign_count(coefficients: Sequence[float]) -> int:
    if len(coefficients) == 0:
        raise ValueError("empty coefficient list")
    if all(c == 0 for c in coefficients):
        raise ValueError("all-zero polynomial")
    if coefficients[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    signs = [np.sign(c) for c in coefficients if c != 0]
    return int(sum(1 for s, t in zip(signs, signs[1:]) if s != t))


# -- uniqueness audit -------------------------------------------------------------------------------


@dataclass
class UniquenessReport:
    weight1: dict[str, FixedPointReport]
    weight2: FixedPointReport
    single_fixed_point: float
    pair_fixed_point: float
    factorization_error: float
    in_interval: bool
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def _pair_graph(d: int):
    if d == 2:
        g = ring(8)
        return g, bicolor(g), 0, 4
    if d == 4:
        g = torus(4, 4)
        return g, bicolor(g), 0, 10
    raise ValueError("uniqueness audit supports d in {2, 4}")


def weight2_map(d: int, p2: float, single: float) -> Map:
    """Composed three-copy map for ``<K_j K_k>`` (j, k of color A, disjoint closed neighborhoods).

    Both single-site purities entering the first subprotocol are held at ``single``.
    """
    g, col, j, k = _pair_graph(d)
    cj, ck = CorrelatorIndex.of_vertices([j], col), CorrelatorIndex.of_vertices([k], col)
    cjk = CorrelatorIndex.of_vertices([j, k], col)
    a = alpha_of(d, p2)

    def f(z: float) -> float:
        table = ExpectationTable(g, col, {cj: single, ck: single, cjk: z})
        return a**4 * generalized_p1_update(table, cjk, p2) ** 3

    return f


def uniqueness_audit(d: int, p2: float, xb: float | None = None) -> UniquenessReport:
    violations: list[str] = []
    w1 = {}
    for br in ("A", "B"):
        rep = find_fixed_points(three_copy_map(br, "full", d, p2), spec={"branch": br, "d": d, "p2": p2})
        w1[br] = rep
        pos = [p for p in rep.fixed_points if p.location > 1e-9]
        if len(pos) > 2:
            violations.append(f"weight-1 {br}: {len(pos)} positive fixed points")
        if sum(p.stability == ATTRACTIVE for p in pos) > 1:
            violations.append(f"weight-1 {br}: more than one attractive positive fixed point")
    if xb is not None:
        for br in ("A", "B"):
            rep = find_fixed_points(bandaid_map(br, d, p2, xb))
            if len([p for p in rep.fixed_points if p.location > 1e-9]) > 1:
                violations.append(f"bandaid {br}: more than one positive fixed point")
    top = max((p for p in w1["A"].fixed_points if p.stability == ATTRACTIVE), key=lambda p: p.location, default=None)
    if top is None or top.location <= 1e-9:
        violations.append("no nontrivial attractive weight-1 fixed point")
        x_star = float("nan")
        w2 = FixedPointReport([])
        z_star = float("nan")
    else:
        x_star = top.location
        w2 = find_fixed_points(weight2_map(d, p2, x_star), spec={"weight": 2, "d": d, "p2": p2})
        pos = [p for p in w2.fixed_points if p.location > 1e-9]
        if len(pos) > 2:
            violations.append(f"weight-2: {len(pos)} positive fixed points")
        if sum(p.stability == ATTRACTIVE for p in pos) > 1:
            violations.append("weight-2: more than one attractive positive fixed point")
        att = [p for p in pos if p.stability == ATTRACTIVE]
        z_star = att[-1].location if att else float("nan")
    err = abs(z_star - x_star**2)
    in_interval = bool(2 * x_star - 1 <= z_star <= 1)
    if not err <= 1e-8:
        violations.append(f"weight-2 fixed point does not factorize (error {err:.3g})")
    if not in_interval:
        violations.append("weight-2 fixed point outside [2<a> - 1, 1]")
    return UniquenessReport(w1, w2, x_star, z_star, err, in_interval, violations)
