"""Closed-form one-point recursion maps.

Every map is returned as a plain ``float -> float`` callable built from value
parameters.  ``d`` is the (maximum) vertex degree, ``p2`` the gate error rate
and ``xb`` the purity of every bandaid qubit.  Stages: ``P1`` purifies color A,
``P2`` purifies color B, ``full`` is ``P2`` after ``P1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

Map = Callable[[float], float]

BRANCHES = ("A", "B")
STAGES = ("P1", "P2", "full")


class ParameterError(ValueError):
    pass


class BoundInapplicable(ValueError):
    pass


def _check(d: int | None = None, p2: float | None = None, xb: float | None = None) -> None:
    if d is not None and (int(d) != d or d < 1):
        raise ParameterError(f"degree must be a positive integer, got {d}")
    if p2 is not None and not 0.0 <= p2 <= 1.0:
        raise ParameterError(f"p2={p2} outside [0, 1]")
    if xb is not None and not 0.0 <= xb <= 1.0:
        raise ParameterError(f"bandaid purity {xb} outside [0, 1]")


def _check_args(branch: str, stage: str) -> None:
    if branch not in BRANCHES:
        raise ParameterError(f"branch must be A or B, got {branch!r}")
    if stage not in STAGES:
        raise ParameterError(f"stage must be one of {STAGES}, got {stage!r}")


def alpha(d: int, p2: float) -> float:
    return (1.0 - p2) ** (d + 1)


# -- three-copy -------------------------------------------------------------------


def three_copy_map(branch: str, stage: str = "full", d: int = 2, p2: float = 0.0) -> Map:
    _check_args(branch, stage)
    _check(d, p2)
    a = alpha(d, p2)

    def corrected(x):  # purified color, single subprotocol
        return 0.5 * a * a * (2.0 + 1.0 / a - x * x) * x if a > 0 else 0.0

    def polluted(x):  # other color, single subprotocol
        return a * a * x**3

    if stage == "P1":
        return corrected if branch == "A" else polluted
    if stage == "P2":
        return polluted if branch == "A" else corrected
    if branch == "A":
        return lambda x: polluted(corrected(x))
    return lambda x: corrected(polluted(x))


def three_copy_full_expanded(branch: str, d: int, p2: float) -> Map:
    """The two composed branches written out as single expressions."""
    a = alpha(d, p2)
    if branch == "A":
        return lambda x: a**8 / 8 * (2 + 1 / a - x * x) ** 3 * x**3
    return lambda x: a**4 / 2 * (2 + 1 / a - a**4 * x**6) * x**3


# -- post-selection under Z-flip-only inputs ------------------------------------------


def postselect_zflip_map(branch: str, stage: str = "P1") -> Map:
    """Accepted-state purity under post-selection; ``P1`` purifies A, ``P2`` purifies B.

    Only valid when every input error is an independent phase flip.
    """
    _check_args(branch, stage)

    def detected(x):  # purified color
        return 2.0 * x / (1.0 + x * x)

    def doubled(x):  # other color
        return x * x

    if stage == "P1":
        return detected if branch == "A" else doubled
    if stage == "P2":
        return doubled if branch == "A" else detected
    if branch == "A":
        return lambda x: doubled(detected(x))
    return lambda x: detected(doubled(x))


# -- bandaid -------------------------------------------------------------------------


def bandaid_exponents(d: int) -> dict[str, int]:
    k = d * (d - 1) // 2  # bandaids that, on average, touch j before its own
    return {
        "purified": 2 * (d + 1) + k,  # == (d(d+3)+4)/2
        "spectator": 2 * d,
    }


def bandaid_map(branch: str, d: int, p2: float, xb: float, stage: str = "full") -> Map:
    _check_args(branch, stage)
    _check(d, p2, xb)
    e = bandaid_exponents(d)
    f_pur = (1.0 - p2) ** e["purified"] * xb
    f_spec = (1.0 - p2) ** e["spectator"] * xb**d

    def purified(x):
        return f_pur

    def spectator(x):
        return f_spec * x

    if stage == "P1":
        return purified if branch == "A" else spectator
    if stage == "P2":
        return spectator if branch == "A" else purified
    if branch == "A":
        return lambda x: spectator(purified(x))
    return lambda x: purified(spectator(x))


def postselection_bandaid_quality(d: int, p2: float) -> float:
    """Leading-order purity of a post-selected star bandaid, floored at 0."""
    _check(d, p2)
    return max(0.0, 1.0 - (d + 1) * p2)


def linear_bandaid_coefficient(d: int) -> float:
    """First-order slope of the final A purity when bandaids come from post-selection."""
    return (3 * d * d + 11 * d + 6) / 2


def linear_bandaid_purity(d: int, p2: float) -> float:
    return 1.0 - linear_bandaid_coefficient(d) * p2


# -- conditional bandaid -----------------------------------------------------------------


@dataclass(frozen=True)
class ConditionalBandaidMaps:
    d: int
    p2: float
    xb: float
    measurement_noise: bool = True

    @property
    def alpha(self) -> float:
        return alpha(self.d, self.p2)

    @property
    def beta(self) -> float:
        return (1.0 - self.p2) ** 2 * self.xb

    @property
    def alpha_m(self) -> float:
        return self.alpha if self.measurement_noise else 1.0

    def p1_exact(self, x: float) -> float:
        """Reference closed form for the purified color; differs from the simulated model at order p2."""
        a, b = self.alpha, self.xb
        return 0.5 * a * (2 * a * x + b - a * b * x * x)

    def p1_derived(self, x: float) -> float:
        """Purified-color purity after one subprotocol under the simulated noise model.

        A site whose syndrome reads 0 keeps its bit (noise of E01 on copy 0,
        and of E01 plus readout on the syndrome); a site that reads 1 receives
        the bandaid's purity ``(1-p2)**(d+1)`` times readout, i.e. ``alpha * alpha_m * xb``.
        """
        a, am = self.alpha, self.alpha_m
        fresh = a * am * self.xb
        return 0.5 * (a * x + a * am * x + fresh * (1.0 - a * am * x * x))

    def step_one(self, x: float) -> float:
        return self.alpha * x * x

    def p2_lower_bound(self, x: float, neighbor_purity: float) -> float:
        a, bt, d = self.alpha, self.beta, self.d
        return a * (1.0 - 0.5 * d * (1.0 - bt**d) * (1.0 - neighbor_purity)) * x * x

    def detection_purity(self, y: float) -> float:
        """``1 - 2 P(syndrome reads 1)`` at a site of purity ``y`` in both copies."""
        return self.alpha * self.alpha_m * y * y

    def _neighbor(self, incoming: float, after_p1: float, rule: str) -> float:
        if rule == "previous_round":
            return incoming
        if rule == "detection":
            return self.detection_purity(after_p1)
        raise ParameterError(f"unknown neighbor rule {rule!r}")

    def round_bound(
        self, xa: float, xb_large: float, p1: str = "derived", neighbor: str = "previous_round"
    ) -> tuple[float, float]:
        """One full round (both subprotocols) acting on (A purity, B purity).

        ``neighbor`` picks what stands in for the neighbor purity in the bound:
        the purity the neighbors entered the round with (``previous_round``), or
        ``1 - 2 P(detect)`` for the syndrome actually read (``detection``).
        Only ``detection`` is a guaranteed lower bound away from the fixed point.
        """
        f = self.p1_derived if p1 == "derived" else self.p1_exact
        a1 = f(xa)
        b1 = self.p2_lower_bound(xb_large, self._neighbor(xa, xa, neighbor))
        a2 = self.p2_lower_bound(a1, self._neighbor(xb_large, b1, neighbor))
        b2 = f(b1)
        return a2, b2

    def composed_bound(self, p1: str = "derived", neighbor: str = "previous_round") -> Map:
        """A-color bound for a full round with both colors entering at purity ``x``."""
        return lambda x: self.round_bound(x, x, p1, neighbor)[0]

    def bound_fixed_point(
        self, p1: str = "derived", neighbor: str = "previous_round", tol: float = 1e-15, max_iter: int = 100_000
    ) -> tuple[float, float]:
        """Attractor of the two-color round bound reached from perfect inputs."""
        xa = xb = 1.0
        for _ in range(max_iter):
            na, nb = self.round_bound(xa, xb, p1, neighbor)
            if abs(na - xa) <= tol and abs(nb - xb) <= tol:
                return na, nb
            xa, xb = na, nb
        return xa, xb


def conditional_bandaid_maps(d: int, p2: float, xb: float, measurement_noise: bool = True) -> ConditionalBandaidMaps:
    _check(d, p2, xb)
    return ConditionalBandaidMaps(d, p2, xb, measurement_noise)


# -- creation and efficiency -----------------------------------------------------------


def creation_purity(d: int, p1: float, p2: float) -> float:
    _check(d, p2)
    if not 0.0 <= p1 <= 1.0:
        raise ParameterError(f"p1={p1} outside [0, 1]")
    return (1.0 - p2) ** (d * (d + 1) / 2) * (1.0 - p1) ** (d + 1)


def efficiency_bound(P0: float, Pth: float, k: int) -> float:
    if k < 0:
        raise ParameterError("k must be nonnegative")
    if not 0.0 <= P0 < Pth <= 1.0:
        raise BoundInapplicable(f"bound needs 0 <= P0 < Pth <= 1, got P0={P0}, Pth={Pth}")
    return (P0 / Pth) ** (2**k)


def copies_required(k: int) -> int:
    return 3 ** (2 * k)
