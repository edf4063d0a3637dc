"""Monte Carlo matrix coefficients of the geodesic flow on a Z^d-cover.

Points of the cover's unit tangent bundle are stored as a frame over the
fundamental polygon together with a sheet in Z^d. The fibre circle carries
a probability measure, so the Haar mass of the whole bundle over the base
surface is its area m0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .counting import DEFAULT_ALPHAS, POOR_FIT_THRESHOLD, FitReport, fit_models
from .cover import CoverSpec
from .errors import BoxOutsideDomain, ConfigError, InsufficientData, ZeroMass
from .fuchsian import GroupPresentation, evaluate, reduce_point
from .fuchsian.presentation import SIDE_TOL
from .hyperbolic import PointH2, UnitTangent, geodesic_flow
from .models import EnumerationBudget, SamplingPlan
from .parallel import map_tasks

_LOGGER = logging.getLogger(__name__)

MIN_SAMPLES = 1_000
DISCARD_WARNING = 1e-3
BOX_TOL = 1e-9


@dataclass(frozen=True)
class FlowBox:
    """Rectangle of base points times an arc of directions, on one sheet."""

    xrange: Tuple[float, float]
    yrange: Tuple[float, float]
    arc: Tuple[float, float] = (-math.pi, math.pi)
    sheet: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        (x0, x1), (y0, y1), (a0, a1) = self.xrange, self.yrange, self.arc
        if not y0 > 0:
            raise ConfigError(f"box y-range {self.yrange} leaves the half-plane")
        if not (x1 > x0 and y1 > y0 and a1 > a0):
            raise ZeroMass(
                f"degenerate box {self.xrange} x {self.yrange} x {self.arc}"
            )
        if a1 - a0 > 2.0 * math.pi + 1e-12:
            raise ConfigError(f"arc {self.arc} is longer than the circle")
        object.__setattr__(self, "sheet", tuple(int(v) for v in self.sheet))

    @property
    def arc_fraction(self) -> float:
        return min(1.0, (self.arc[1] - self.arc[0]) / (2.0 * math.pi))

    def contains(
        self, x: np.ndarray, y: np.ndarray, theta: np.ndarray
    ) -> np.ndarray:
        (x0, x1), (y0, y1), (a0, a1) = self.xrange, self.yrange, self.arc
        inside = (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        if self.arc_fraction < 1.0:
            inside &= np.mod(theta - a0, 2.0 * math.pi) <= a1 - a0
        return inside

    def to_dict(self) -> Dict[str, Any]:
        return {
            "xrange": list(self.xrange),
            "yrange": list(self.yrange),
            "arc": list(self.arc),
            "sheet": list(self.sheet),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FlowBox":
        return cls(
            tuple(data["xrange"]),
            tuple(data["yrange"]),
            tuple(data.get("arc", (-math.pi, math.pi))),
            tuple(data.get("sheet", ())),
        )


def check_box(g: GroupPresentation, box: FlowBox, d: Optional[int] = None) -> None:
    """Require the base rectangle to sit in the closed polygon.

    The largest violation of a side over a rectangle is attained at a corner
    or at the bottom-edge point nearest the side's centre.

    Raises:
        BoxOutsideDomain: If some side is crossed.
        ConfigError: If the sheet does not live in Z^d.
    """
    if d is not None and len(box.sheet) != d:
        raise ConfigError(f"box sheet {list(box.sheet)} does not live in Z^{d}")
    (x0, x1), (y0, y1) = box.xrange, box.yrange
    corners = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)]
    for side in g.sides:
        points = list(corners)
        if not side.is_vertical:
            points.append((min(max(side.center, x0), x1), y0))
        worst = max(side.outside(x, y) for x, y in points)
        if worst > BOX_TOL:
            raise BoxOutsideDomain(
                f"box {box.xrange} x {box.yrange} crosses the side paired by "
                f"{side.pairing} (sinh distance {worst:.3g})"
            )


def haar_mass(box: FlowBox) -> float:
    """(x-width) * (1/y0 - 1/y1) * arc / (2 pi)."""
    (x0, x1), (y0, y1) = box.xrange, box.yrange
    mass = (x1 - x0) * (1.0 / y0 - 1.0 / y1) * box.arc_fraction
    if not mass > 0:
        raise ZeroMass(f"box {box.to_dict()} has no mass")
    return mass


def finite_volume_limit(box_a: FlowBox, box_b: FlowBox, m0: float) -> float:
    """mass(A) mass(B) / m0, the large-t limit on the base surface itself."""
    return haar_mass(box_a) * haar_mass(box_b) / m0


def _frames(x: np.ndarray, y: np.ndarray, theta: np.ndarray) -> np.ndarray:
    phi = (theta - math.pi / 2.0) / 2.0
    cos, sin, sy = np.cos(phi), np.sin(phi), np.sqrt(y)
    frames = np.empty((x.size, 2, 2))
    frames[:, 0, 0] = sy * cos - x / sy * sin
    frames[:, 0, 1] = sy * sin + x / sy * cos
    frames[:, 1, 0] = -sin / sy
    frames[:, 1, 1] = cos / sy
    return frames


def _coordinates(frames: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    a, b = frames[:, 0, 0], frames[:, 0, 1]
    c, d = frames[:, 1, 0], frames[:, 1, 1]
    denom = c * c + d * d
    x = (a * c + b * d) / denom
    y = (a * d - b * c) / denom
    theta = math.pi / 2.0 - 2.0 * np.arctan2(c, d)
    return x, y, np.arctan2(np.sin(theta), np.cos(theta))


def sample_box(
    box: FlowBox, rng: np.random.Generator, count: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw (x, y, theta) with density proportional to dx dy / y^2 d theta.

    y is drawn by inverting the distribution function of 1/y^2.
    """
    size = 1 if count is None else count
    (x0, x1), (y0, y1), (a0, a1) = box.xrange, box.yrange, box.arc
    x = rng.uniform(x0, x1, size)
    y = 1.0 / (1.0 / y0 - rng.random(size) * (1.0 / y0 - 1.0 / y1))
    theta = rng.uniform(a0, a1, size)
    return x, y, theta


def sample_tangent(
    box: FlowBox, rng: np.random.Generator
) -> Tuple[UnitTangent, Tuple[int, ...]]:
    """One sample as a unit tangent vector and its sheet."""
    x, y, theta = sample_box(box, rng)
    z = PointH2(float(x[0]), float(y[0]))
    return UnitTangent.from_point_angle(z, float(theta[0])), box.sheet


def _legs(t: float, step: float) -> List[float]:
    if t < 0:
        raise ConfigError(f"flow time {t} is negative")
    if step <= 0:
        raise ConfigError(f"flow step {step} is not positive")
    full = int(math.floor(t / step))
    legs = [step] * full
    rest = t - full * step
    if rest > 1e-12:
        legs.append(rest)
    return legs


def flow_and_reduce(
    g: GroupPresentation,
    spec: CoverSpec,
    v: UnitTangent,
    xi: Sequence[int],
    t: float,
    step: float = 0.5,
    budget: Optional[EnumerationBudget] = None,
) -> Tuple[UnitTangent, Tuple[int, ...]]:
    """Flow for time t in legs of ``step``, pulling back into the polygon each time.

    Each reduction word W (evaluate(W) z' = z) moves the sheet by -phi(W).

    Raises:
        CuspEscape: From :func:`reduce_point`.
    """
    budget = budget or EnumerationBudget()
    sheet = np.asarray(xi, dtype=np.int64)

    def pull_back(vector: UnitTangent) -> UnitTangent:
        nonlocal sheet
        _, word = reduce_point(
            g, vector.base_point, budget.cusp_cutoff, budget.max_reduction_steps
        )
        if not word.letters:
            return vector
        shift = spec.image(word.abelianize(g.rank))
        sheet = sheet - np.asarray(shift, dtype=np.int64)
        move = evaluate(g, word).inverse().to_float()
        return UnitTangent(move @ vector.frame.to_float())

    v = pull_back(v)
    for leg in _legs(t, step):
        v = pull_back(geodesic_flow(v, leg))
    return v, tuple(int(s) for s in sheet)


@dataclass(frozen=True, eq=False)
class _Kernel:
    """Arrays describing the polygon for the batch reduction."""

    sides: tuple
    moves: np.ndarray  # (sides, 2, 2)
    shifts: np.ndarray  # (sides, d)

    @classmethod
    def build(cls, g: GroupPresentation, spec: CoverSpec) -> "_Kernel":
        moves = np.array(
            [np.reshape(m.to_float().as_tuple(), (2, 2)) for m in g.moves]
        )
        shifts = np.array(
            [spec.image(side.pairing.abelianize(g.rank)) for side in g.sides],
            dtype=np.int64,
        ).reshape(len(g.sides), spec.d)
        return cls(tuple(g.sides), moves, shifts)


def _reduce_batch(
    kernel: _Kernel,
    frames: np.ndarray,
    sheets: np.ndarray,
    escaped: np.ndarray,
    budget: EnumerationBudget,
) -> None:
    active = np.flatnonzero(~escaped)
    for _ in range(budget.max_reduction_steps):
        if active.size == 0:
            break
        x, y, _ = _coordinates(frames[active])
        values = np.stack([side.outside(x, y) for side in kernel.sides])
        worst = values.argmax(axis=0)
        out = values[worst, np.arange(active.size)] > SIDE_TOL
        active, worst = active[out], worst[out]
        if active.size == 0:
            break
        frames[active] = kernel.moves[worst] @ frames[active]
        sheets[active] += kernel.shifts[worst]
    else:
        escaped[active] = True
    det = frames[:, 0, 0] * frames[:, 1, 1] - frames[:, 0, 1] * frames[:, 1, 0]
    frames /= np.sqrt(np.abs(det))[:, None, None]
    _, y, _ = _coordinates(frames)
    escaped |= (y > budget.cusp_cutoff) | (y < 1.0 / budget.cusp_cutoff)


def flow_and_reduce_batch(
    g: GroupPresentation,
    spec: CoverSpec,
    frames: np.ndarray,
    sheets: np.ndarray,
    t: float,
    step: float = 0.5,
    budget: Optional[EnumerationBudget] = None,
    kernel: Optional[_Kernel] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :func:`flow_and_reduce` over frames of shape (n, 2, 2).

    Returns new frames, new sheets and a mask of samples lost to a cusp.
    """
    budget = budget or EnumerationBudget()
    kernel = kernel or _Kernel.build(g, spec)
    frames = np.array(frames, dtype=np.float64)
    sheets = np.array(sheets, dtype=np.int64).reshape(frames.shape[0], spec.d)
    escaped = np.zeros(frames.shape[0], dtype=bool)
    _reduce_batch(kernel, frames, sheets, escaped, budget)
    for leg in _legs(t, step):
        scale = math.exp(leg / 2.0)
        frames[:, :, 0] *= scale
        frames[:, :, 1] /= scale
        _reduce_batch(kernel, frames, sheets, escaped, budget)
    return frames, sheets, escaped


@dataclass(frozen=True, eq=False)
class _BatchJob:
    group: GroupPresentation
    spec: CoverSpec
    box_a: FlowBox
    box_b: FlowBox
    t: float
    size: int
    seed: np.random.SeedSequence
    step: float
    budget: EnumerationBudget


def _run_batch(job: _BatchJob) -> Tuple[int, int, int]:
    """(hits, kept, discarded) for one independently seeded batch."""
    rng = np.random.Generator(np.random.Philox(job.seed))
    x, y, theta = sample_box(job.box_b, rng, job.size)
    sheets = np.tile(np.asarray(job.box_b.sheet, dtype=np.int64), (job.size, 1))
    frames, sheets, escaped = flow_and_reduce_batch(
        job.group,
        job.spec,
        _frames(x, y, theta),
        sheets,
        job.t,
        job.step,
        job.budget,
    )
    x, y, theta = _coordinates(frames)
    hit = job.box_a.contains(x, y, theta) & ~escaped
    if job.spec.d:
        hit &= np.all(sheets == np.asarray(job.box_a.sheet, dtype=np.int64), axis=1)
    return int(hit.sum()), int((~escaped).sum()), int(escaped.sum())


@dataclass
class MixingEstimate:
    t: float
    estimate: float
    stderr: float
    samples: int
    discarded: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "discarded": self.discarded,
        }


def matrix_coefficient(
    g: GroupPresentation,
    spec: CoverSpec,
    box_a: FlowBox,
    box_b: FlowBox,
    t: float,
    plan: Optional[SamplingPlan] = None,
    budget: Optional[EnumerationBudget] = None,
    seed_key: int = 0,
) -> MixingEstimate:
    """mass(B) times the fraction of B-samples that land in A after time t.

    Samples lost to a cusp are dropped from both counts and reported.

    Raises:
        ConfigError: Fewer than 1000 samples, or a sheet outside Z^d.
        BoxOutsideDomain: A box leaves the polygon.
    """
    plan = plan or SamplingPlan()
    budget = budget or EnumerationBudget()
    if plan.samples < MIN_SAMPLES:
        raise ConfigError(f"{plan.samples} samples; need at least {MIN_SAMPLES}")
    for box in (box_a, box_b):
        check_box(g, box, spec.d)
    mass = haar_mass(box_b)
    sizes = [plan.batch] * (plan.samples // plan.batch)
    if plan.samples % plan.batch:
        sizes.append(plan.samples % plan.batch)
    seeds = np.random.SeedSequence([plan.seed, seed_key]).spawn(len(sizes))
    jobs = [
        _BatchJob(g, spec, box_a, box_b, t, size, seed, plan.step, budget)
        for size, seed in zip(sizes, seeds)
    ]
    results = map_tasks(_run_batch, jobs, plan.threads)
    hits = sum(r[0] for r in results)
    kept = sum(r[1] for r in results)
    discarded = sum(r[2] for r in results)
    if kept < 2:
        raise InsufficientData(f"only {kept} samples survived at t={t}")
    if discarded > DISCARD_WARNING * plan.samples:
        _LOGGER.warning(
            "t=%s: %d of %d samples escaped into a cusp", t, discarded, plan.samples
        )
    fraction = hits / kept
    variance = (hits - hits * fraction) / (kept - 1)
    return MixingEstimate(
        t=float(t),
        estimate=mass * fraction,
        stderr=mass * math.sqrt(variance / kept),
        samples=kept,
        discarded=discarded,
    )


@dataclass
class MixingSeries:
    points: List[MixingEstimate]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    @property
    def estimates(self) -> np.ndarray:
        return np.array([p.estimate for p in self.points])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([p.stderr for p in self.points])

    def rows(self) -> List[Tuple[float, float, float, int, int]]:
        return [
            (p.t, p.estimate, p.stderr, p.samples, p.discarded) for p in self.points
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {"points": [p.to_dict() for p in self.points], "metadata": self.metadata}


def mixing_series(
    g: GroupPresentation,
    spec: CoverSpec,
    box_a: FlowBox,
    box_b: FlowBox,
    t_grid: Sequence[float],
    plan: Optional[SamplingPlan] = None,
    budget: Optional[EnumerationBudget] = None,
) -> MixingSeries:
    """One independent estimate per grid time."""
    plan = plan or SamplingPlan()
    points = []
    for index, t in enumerate(t_grid):
        points.append(matrix_coefficient(g, spec, box_a, box_b, t, plan, budget, index))
        _LOGGER.info(
            "t=%s: %.6g +- %.2g", t, points[-1].estimate, points[-1].stderr
        )
    return MixingSeries(
        points,
        {
            "group": g.name,
            "phi": spec.to_dict(),
            "box_a": box_a.to_dict(),
            "box_b": box_b.to_dict(),
            "plan": plan.to_dict(),
        },
    )


def estimate_work(plan: SamplingPlan, t_grid: Sequence[float]) -> Dict[str, Any]:
    """Samples and flow legs a series would cost, without sampling."""
    legs = sum(len(_legs(float(t), plan.step)) for t in t_grid)
    return {
        "times": len(t_grid),
        "samples_per_time": plan.samples,
        "total_samples": plan.samples * len(t_grid),
        "flow_legs": plan.samples * legs,
        "batches": -(-plan.samples // plan.batch) * len(t_grid),
    }


def decay_fit(
    series: MixingSeries,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    window: Optional[Tuple[float, float]] = None,
    predicted: Optional[float] = None,
    threshold: float = POOR_FIT_THRESHOLD,
) -> FitReport:
    """Select alpha in estimate(t) ~ C t^-alpha.

    The fit runs on log(estimate), whose variance is (stderr / estimate)^2, so
    each point is weighted by (estimate / stderr)^2.
    """
    t, stderr = series.t, series.stderrs
    window = window or (float(t.min()), float(t.max()))
    weights = None
    if np.all(stderr > 0):
        weights = (series.estimates / stderr) ** 2
    else:
        _LOGGER.warning("Zero standard error in the series; fitting unweighted")
    report = fit_models(
        t, series.estimates, alphas, window, "power", weights, threshold
    )
    report.predicted = predicted
    return report


def renormalized_ratio(
    series: MixingSeries, c: float, alpha: float, box_a: FlowBox, box_b: FlowBox
) -> np.ndarray:
    """t^alpha estimate(t) / (c mass(A) mass(B)); tends to one when the law holds."""
    scale = c * haar_mass(box_a) * haar_mass(box_b)
    return series.t**alpha * series.estimates / scale
