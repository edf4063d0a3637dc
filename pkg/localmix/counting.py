"""Orbit and closed-geodesic counts, and the exponent-discrimination fit."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cover import CoverSpec
from .errors import ConfigError, InsufficientData
from .fuchsian import (
    ConjugacyClass,
    GroupPresentation,
    ball_distances,
    enumerate_conjugacy_classes,
)
from .hyperbolic import ORIGIN, PointH2
from .models import EnumerationBudget

_LOGGER = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.0, 0.5, 1.0, 1.5, 2.0)
POOR_FIT_THRESHOLD = 0.05
MIN_FIT_POINTS = 5


@dataclass
class CountSeries:
    """N(T) on an increasing grid of T, with a description of what was counted."""

    t: np.ndarray
    n: np.ndarray
    kind: str
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=np.float64)
        self.n = np.asarray(self.n)
        if self.t.shape != self.n.shape:
            raise ConfigError("T grid and counts differ in length")
        if np.any(np.diff(self.t) <= 0):
            raise ConfigError("T grid must be strictly increasing")

    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.t.tolist(), self.n.tolist()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "t": self.t.tolist(),
            "n": self.n.tolist(),
            "metadata": self.metadata,
        }


@dataclass
class FitReport:
    """Per-candidate constants and RMS residuals of log N - (model) ~ log C."""

    alphas: List[float]
    constants: List[float]
    residuals: List[float]
    selected: float
    window: Tuple[float, float]
    model: str
    predicted: Optional[float] = None
    poor_fit: bool = False
    threshold: float = POOR_FIT_THRESHOLD

    @property
    def best_residual(self) -> float:
        return min(self.residuals)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alphas": self.alphas,
            "constants": self.constants,
            "residuals": self.residuals,
            "selected": self.selected,
            "predicted": self.predicted,
            "window": list(self.window),
            "model": self.model,
            "poor_fit": self.poor_fit,
            "threshold": self.threshold,
        }


def _check_grid(t_grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(sorted(set(float(t) for t in t_grid)), dtype=np.float64)
    if grid.size == 0:
        raise ConfigError("empty T grid")
    return grid


def orbit_count(
    g: GroupPresentation,
    spec: CoverSpec,
    t_grid: Sequence[float],
    x: PointH2 = ORIGIN,
    y: PointH2 = ORIGIN,
    budget: Optional[EnumerationBudget] = None,
    threads: int = 1,
) -> CountSeries:
    """N(T) = #{gamma in ker phi : d(x, gamma y) < T}, from one ball enumeration."""
    grid = _check_grid(t_grid)
    distances, exponents = ball_distances(g, x, y, float(grid[-1]), budget, threads)
    if spec.d:
        keep = ~np.any(spec.images(exponents), axis=1)
        distances = distances[keep]
    distances = np.sort(distances)
    counts = np.searchsorted(distances, grid, side="left")
    _LOGGER.info("Orbit count up to T=%s: %d kernel elements", grid[-1], counts[-1])
    return CountSeries(
        grid,
        counts,
        "orbit",
        {"group": g.name, "phi": spec.to_dict(), "x": [x.x, x.y], "y": [y.x, y.y]},
    )


def primitive_classes(
    g: GroupPresentation,
    l_max: float,
    budget: Optional[EnumerationBudget] = None,
    threads: int = 1,
    method: str = "auto",
) -> List[ConjugacyClass]:
    return [
        c
        for c in enumerate_conjugacy_classes(g, l_max, budget, threads, method)
        if c.primitive
    ]


def geodesic_count(
    g: GroupPresentation,
    spec: CoverSpec,
    xi: Sequence[int],
    t_grid: Sequence[float],
    budget: Optional[EnumerationBudget] = None,
    threads: int = 1,
    classes: Optional[Sequence[ConjugacyClass]] = None,
) -> CountSeries:
    """Oriented primitive closed geodesics of length <= T with phi(class) = xi.

    ``classes`` may carry a precomputed primitive-class list covering the grid.
    """
    grid = _check_grid(t_grid)
    xi = tuple(int(v) for v in xi)
    if len(xi) != spec.d:
        raise ConfigError(f"class {list(xi)} does not live in Z^{spec.d}")
    if classes is None:
        classes = primitive_classes(g, float(grid[-1]), budget, threads)
    lengths = np.sort(
        np.asarray(
            [c.length for c in classes if spec.image(c.abelianize(g.rank)) == xi],
            dtype=np.float64,
        )
    )
    counts = np.searchsorted(lengths, grid, side="right")
    return CountSeries(
        grid,
        counts,
        "geodesic",
        {"group": g.name, "phi": spec.to_dict(), "xi": list(xi)},
    )


def geodesic_histogram(
    g: GroupPresentation,
    spec: CoverSpec,
    l_max: float,
    classes: Optional[Sequence[ConjugacyClass]] = None,
) -> Dict[Tuple[int, ...], int]:
    """Number of primitive classes of length <= l_max in each homology class."""
    if classes is None:
        classes = primitive_classes(g, l_max)
    histogram: Dict[Tuple[int, ...], int] = {}
    for c in classes:
        if c.length <= l_max:
            key = spec.image(c.abelianize(g.rank))
            histogram[key] = histogram.get(key, 0) + 1
    return histogram


def fit_models(
    t: np.ndarray,
    values: np.ndarray,
    alphas: Sequence[float],
    window: Tuple[float, float],
    model: str = "exponential",
    weights: Optional[np.ndarray] = None,
    threshold: float = POOR_FIT_THRESHOLD,
) -> FitReport:
    """Least-squares log C for each alpha; the smallest residual wins.

    ``exponential`` fits log N - T + alpha log T and ``power`` fits
    log v + alpha log t, both against a constant log C.

    Raises:
        InsufficientData: Fewer than five window points, or a non-positive value.
    """
    if not alphas:
        raise ConfigError("no candidate exponents")
    t = np.asarray(t, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    lo, hi = window
    inside = (t >= lo) & (t <= hi)
    if inside.sum() < MIN_FIT_POINTS:
        raise InsufficientData(
            f"{int(inside.sum())} points in window [{lo}, {hi}], need {MIN_FIT_POINTS}"
        )
    tw, vw = t[inside], values[inside]
    if np.any(vw <= 0):
        raise InsufficientData("counts must be positive throughout the fit window")
    if model not in ("exponential", "power"):
        raise ConfigError(f"unknown model {model!r}")
    if weights is None:
        w = np.ones_like(tw)
    else:
        w = np.asarray(weights, dtype=np.float64)[inside]
    w = w / w.sum()
    base = np.log(vw) - tw if model == "exponential" else np.log(vw)
    constants, residuals = [], []
    for alpha in alphas:
        y = base + alpha * np.log(tw)
        log_c = float(np.dot(w, y))
        residuals.append(float(np.sqrt(np.dot(w, (y - log_c) ** 2))))
        constants.append(float(np.exp(log_c)))
    best = int(np.argmin(residuals))
    report = FitReport(
        alphas=[float(a) for a in alphas],
        constants=constants,
        residuals=residuals,
        selected=float(alphas[best]),
        window=(float(lo), float(hi)),
        model=model,
        poor_fit=residuals[best] > threshold,
        threshold=threshold,
    )
    if report.poor_fit:
        _LOGGER.warning(
            "Poor fit: best residual %.3g above %.3g (alpha=%s)",
            residuals[best],
            threshold,
            report.selected,
        )
    return report


def fit_exponent(
    series: CountSeries,
    window: Tuple[float, float],
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    predicted: Optional[float] = None,
    threshold: float = POOR_FIT_THRESHOLD,
) -> FitReport:
    """Discriminate N(T) ~ C e^T / T^alpha among the candidate exponents."""
    report = fit_models(
        series.t, series.n, alphas, window, "exponential", None, threshold
    )
    report.predicted = predicted
    _LOGGER.info("Selected alpha=%s (predicted %s)", report.selected, predicted)
    return report
