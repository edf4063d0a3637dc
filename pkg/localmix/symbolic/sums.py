"""Windowed path sums Q_t, the correlation I_t and local-limit series."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import BudgetExceeded, ConfigError, UnboundedWindow
from .operators import GibbsData, check_aperiodic, covariance
from .shift import ShiftSystem

_LOGGER = logging.getLogger(__name__)

CLOCKS = ("roof", "steps")
NODE_CAP = 50_000_000
# Sums of roof values closer than this share one dynamic-programming bucket.
TIME_DIGITS = 9


@dataclass(frozen=True)
class Window:
    """A step function: sum of weight * 1[lo, hi] over its pieces."""

    pieces: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        if not self.pieces:
            raise ConfigError("window has no pieces")
        pieces = []
        for lo, hi, weight in self.pieces:
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise UnboundedWindow(f"window piece [{lo}, {hi}] is unbounded")
            if lo >= hi:
                raise ConfigError(f"window piece [{lo}, {hi}] is empty")
            pieces.append((float(lo), float(hi), float(weight)))
        object.__setattr__(self, "pieces", tuple(pieces))

    @classmethod
    def indicator(cls, lo: float = -0.5, hi: float = 0.5) -> "Window":
        return cls(((lo, hi, 1.0),))

    @property
    def support(self) -> Tuple[float, float]:
        return min(p[0] for p in self.pieces), max(p[1] for p in self.pieces)

    @property
    def integral(self) -> float:
        return sum((hi - lo) * w for lo, hi, w in self.pieces)

    def value(self, s: float) -> float:
        return sum(w for lo, hi, w in self.pieces if lo <= s <= hi)

    def overlap(self, other: "Window", shift: float) -> float:
        """Integral over s of self(s) * other(s - shift)."""
        total = 0.0
        for lo1, hi1, w1 in self.pieces:
            for lo2, hi2, w2 in other.pieces:
                width = min(hi1, hi2 + shift) - max(lo1, lo2 + shift)
                if width > 0:
                    total += w1 * w2 * width
        return total

    def to_dict(self) -> List[List[float]]:
        return [list(p) for p in self.pieces]

    @classmethod
    def from_dict(cls, data: Sequence[Sequence[float]]) -> "Window":
        try:
            return cls(tuple((p[0], p[1], p[2] if len(p) > 2 else 1.0) for p in data))
        except (TypeError, IndexError) as err:
            raise ConfigError(f"bad window {data!r}: {err}") from err


def _check_clock(clock: str) -> None:
    if clock not in CLOCKS:
        raise ConfigError(f"unknown clock {clock!r}; choose from {', '.join(CLOCKS)}")


def _as_xi(system: ShiftSystem, xi: Sequence[int]) -> Tuple[int, ...]:
    xi = tuple(int(v) for v in xi)
    if len(xi) != system.d:
        raise ConfigError(f"xi={list(xi)} but the displacement has rank {system.d}")
    return xi


def _state_vector(system: ShiftSystem, values: Optional[Sequence[float]]) -> np.ndarray:
    if values is None:
        return np.ones(system.size)
    vector = np.asarray(values, dtype=np.float64)
    if vector.shape != (system.size,):
        raise ConfigError(f"state function needs {system.size} values")
    return vector


class _PathBudget:
    """Remaining-step bound used to prune partial paths."""

    def __init__(self, system: ShiftSystem, hi: float, clock: str) -> None:
        self.hi = hi
        self.clock = clock
        self.f_max = system.f_max
        self.bound = system.roof_bound() if clock == "roof" else None

    def remaining(self, n: int, r: float) -> int:
        """Most further steps a path may take and still reach time <= hi; -1 if none."""
        if self.bound is None:
            return int(math.floor(self.hi - n))
        slack = self.hi - r - self.bound.m_neg
        if slack < 0:
            return -1
        return self.bound.k * (int(slack // self.bound.c) + 1) - 1

    def reachable(self, n: int, r: float, acc: Tuple[int, ...], xi: Tuple[int, ...]):
        left = self.remaining(n, r)
        if left < 0:
            return False
        gap = max((abs(a - b) for a, b in zip(acc, xi)), default=0)
        return gap <= self.f_max * left


def backward_terms(
    system: ShiftSystem,
    weight: np.ndarray,
    x: int,
    xi: Tuple[int, ...],
    lo: float,
    hi: float,
    clock: str = "roof",
    node_cap: int = NODE_CAP,
) -> Iterator[Tuple[int, float, float]]:
    """Paths y with sigma^n y = x and f_n(y) = xi whose time lies in [lo, hi].

    Time is r_n(y) for the roof clock and n for the steps clock. Yields
    ``(n, r_n, exp(-r_n(y)) weight(y_0))`` with paths sharing an endpoint,
    displacement and time merged.

    Raises:
        NonPositiveRoof: Roof clock on a roof with no positive block sum.
        BudgetExceeded: More than ``node_cap`` partial paths.
    """
    budget = _PathBudget(system, hi, clock)
    preds = [system.shift.predecessors(s).tolist() for s in range(system.size)]
    roof = system.roof
    disp = [tuple(row) for row in system.displacement.tolist()]
    zero = tuple(0 for _ in xi)
    layer: Dict[Tuple[int, Tuple[int, ...], float], List[Any]] = {
        (x, zero, 0.0): [1, 0.0]
    }
    n, nodes = 0, 1
    while layer:
        for (state, acc, _), (count, r) in layer.items():
            time = r if clock == "roof" else n
            if acc == xi and lo <= time <= hi:
                yield n, r, math.exp(math.log(count) - r) * weight[state]
        following: Dict[Tuple[int, Tuple[int, ...], float], List[Any]] = {}
        for (state, acc, _), (count, r) in layer.items():
            for i in preds[state]:
                nr = r + roof[i, state]
                nacc = tuple(a + f for a, f in zip(acc, disp[i]))
                if not budget.reachable(n + 1, nr, nacc, xi):
                    continue
                key = (i, nacc, round(nr, TIME_DIGITS))
                entry = following.get(key)
                if entry is None:
                    following[key] = [count, nr]
                else:
                    entry[0] += count
        nodes += len(following)
        if nodes > node_cap:
            raise BudgetExceeded(f"path sum exceeded {node_cap} partial paths")
        layer = following
        n += 1


def q_sum(
    gibbs: GibbsData,
    x: int,
    xi: Sequence[int],
    t: float,
    window: Window,
    phi: Optional[Sequence[float]] = None,
    clock: str = "roof",
) -> float:
    """Q_t(phi (x) u)(x, xi) for the normalized system of ``gibbs``.

    Sums exp(-r_n(y)) (phi psi)(y) u(time - t) over n >= 0 and paths y with
    sigma^n y = x and f_n(y) = xi.
    """
    _check_clock(clock)
    system = gibbs.normalized
    xi = _as_xi(system, xi)
    weight = _state_vector(system, phi) * gibbs.psi
    lo, hi = window.support
    total = 0.0
    for n, r, value in backward_terms(system, weight, x, xi, t + lo, t + hi, clock):
        total += value * window.value((r if clock == "roof" else n) - t)
    return total


def _overlap_range(u1: Window, u2: Window) -> Tuple[float, float]:
    lo1, hi1 = u1.support
    lo2, hi2 = u2.support
    return lo1 - hi2, hi1 - lo2


def i_t_direct(
    gibbs: GibbsData,
    t: float,
    m0: float,
    phi1: Sequence[float],
    xi1: Sequence[int],
    u1: Window,
    phi2: Sequence[float],
    xi2: Sequence[int],
    u2: Window,
    node_cap: int = NODE_CAP,
) -> float:
    """I_t(Psi_1, Psi_2) summed over forward nu-weighted cylinders.

    Psi_k(x, xi, s) = phi_k(x_0) 1[xi = xi_k] u_k(s), and the measure is
    (m0 / mean roof) nu x counting x Lebesgue.
    """
    system = gibbs.normalized
    dxi = tuple(a - b for a, b in zip(_as_xi(system, xi1), _as_xi(system, xi2)))
    phi1 = _state_vector(system, phi1)
    phi2 = _state_vector(system, phi2)
    a_lo, a_hi = _overlap_range(u1, u2)
    budget = _PathBudget(system, t - a_lo, "roof")
    weights = system.weights
    transition = system.shift.transition
    succ = [np.flatnonzero(transition[s]).tolist() for s in range(system.size)]
    disp = [tuple(row) for row in system.displacement.tolist()]
    zero = tuple(0 for _ in dxi)
    layer: Dict[Tuple[int, Tuple[int, ...], float], List[float]] = {}
    for s in range(system.size):
        if gibbs.psi[s] * phi2[s]:
            layer[(s, zero, 0.0)] = [gibbs.psi[s] * phi2[s], 0.0]
    total, nodes = 0.0, len(layer)
    while layer:
        for (state, acc, _), (weight, r) in layer.items():
            if acc == dxi and t - a_hi <= r <= t - a_lo:
                total += weight * gibbs.rho[state] * phi1[state] * u1.overlap(u2, t - r)
        following: Dict[Tuple[int, Tuple[int, ...], float], List[float]] = {}
        for (state, acc, _), (weight, r) in layer.items():
            nacc = tuple(a + f for a, f in zip(acc, disp[state]))
            for j in succ[state]:
                nr = r + system.roof[state, j]
                if not budget.reachable(0, nr, nacc, dxi):
                    continue
                key = (j, nacc, round(nr, TIME_DIGITS))
                entry = following.get(key)
                if entry is None:
                    following[key] = [weight * weights[state, j], nr]
                else:
                    entry[0] += weight * weights[state, j]
        nodes += len(following)
        if nodes > node_cap:
            raise BudgetExceeded(f"correlation sum exceeded {node_cap} partial paths")
        layer = following
    return m0 / gibbs.mean_roof * total


def i_t_unfolded(
    gibbs: GibbsData,
    t: float,
    m0: float,
    phi1: Sequence[float],
    xi1: Sequence[int],
    u1: Window,
    phi2: Sequence[float],
    xi2: Sequence[int],
    u2: Window,
) -> float:
    """I_t(Psi_1, Psi_2) rewritten through the transfer operator.

    Integrates phi_1 against Q_{t - s}(phi_2 (x) u_2) over rho and s.
    """
    system = gibbs.normalized
    dxi = tuple(a - b for a, b in zip(_as_xi(system, xi1), _as_xi(system, xi2)))
    phi1 = _state_vector(system, phi1)
    weight = _state_vector(system, phi2) * gibbs.psi
    a_lo, a_hi = _overlap_range(u1, u2)
    total = 0.0
    for x in range(system.size):
        if not gibbs.rho[x] * phi1[x]:
            continue
        inner = 0.0
        for _, r, value in backward_terms(system, weight, x, dxi, t - a_hi, t - a_lo):
            inner += value * u1.overlap(u2, t - r)
        total += gibbs.rho[x] * phi1[x] * inner
    return m0 / gibbs.mean_roof * total


def predicted_llt_limit(
    gibbs: GibbsData,
    x: int,
    window: Window,
    phi: Optional[Sequence[float]] = None,
    clock: str = "roof",
) -> float:
    """Limit of t^(d/2) Q_t(phi (x) u)(x, xi) for fixed xi.

    psi(x) nu(phi) |u| / tau times the centred Gaussian density at zero with
    covariance cov / tau, where tau is the mean roof (one for the steps clock).
    A displacement with nonzero mean drifts away and the limit is zero.
    """
    _check_clock(clock)
    system = gibbs.normalized
    phi = _state_vector(system, phi)
    tau = 1.0 if clock == "steps" else gibbs.mean_roof
    limit = gibbs.psi[x] * float(gibbs.nu @ phi) * window.integral / tau
    if system.d == 0:
        return limit
    mean, cov = covariance(system)
    if np.linalg.norm(mean) > 1e-8:
        _LOGGER.warning("Displacement has mean %s; local limit is zero", mean.tolist())
        return 0.0
    det = float(np.linalg.det(cov))
    return limit * (2.0 * math.pi / tau) ** (-system.d / 2) / math.sqrt(det)


@dataclass
class LLTSeries:
    t: np.ndarray
    values: np.ndarray
    scaled: np.ndarray
    predicted: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    def rows(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.t.tolist(), self.values.tolist(), self.scaled.tolist()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t.tolist(),
            "q": self.values.tolist(),
            "scaled": self.scaled.tolist(),
            "predicted": self.predicted,
            "metadata": self.metadata,
        }


def llt_series(
    gibbs: GibbsData,
    x: int,
    xi: Sequence[int],
    t_grid: Sequence[float],
    window: Optional[Window] = None,
    phi: Optional[Sequence[float]] = None,
    clock: str = "roof",
) -> LLTSeries:
    """t^(d/2) Q_t on a grid of t, next to its predicted limit.

    Raises:
        PeriodicCocycle: If the displacement is supported on a coset lattice.
    """
    _check_clock(clock)
    window = window or Window.indicator()
    check_aperiodic(gibbs.normalized)
    grid = np.asarray(t_grid, dtype=np.float64)
    values = np.array([q_sum(gibbs, x, xi, t, window, phi, clock) for t in grid])
    scaled = values * grid ** (gibbs.normalized.d / 2)
    predicted = predicted_llt_limit(gibbs, x, window, phi, clock)
    _LOGGER.info(
        "Local limit at t=%s: %.6g (predicted %.6g)", grid[-1], scaled[-1], predicted
    )
    return LLTSeries(
        grid,
        values,
        scaled,
        predicted,
        {"x": x, "xi": list(xi), "clock": clock, "window": window.to_dict()},
    )
