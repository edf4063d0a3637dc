"""Finite topological Markov shifts with an edge roof and a state displacement."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidShift, NonPositiveRoof

_LOGGER = logging.getLogger(__name__)


def _is_primitive(transition: np.ndarray) -> bool:
    """Wielandt: a primitive n x n matrix has A^((n-1)^2 + 1) > 0."""
    n = transition.shape[0]
    power = (n - 1) ** 2 + 1
    result = np.eye(n, dtype=np.int64)
    base = (transition > 0).astype(np.int64)
    while power:
        if power & 1:
            result = np.minimum(result @ base, 1)
        base = np.minimum(base @ base, 1)
        power >>= 1
    return bool(np.all(result > 0))


@dataclass(frozen=True, eq=False)
class MarkovShift:
    """The one-sided shift on sequences with transition[x_k, x_{k+1}] == 1."""

    transition: np.ndarray
    states: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        t = np.asarray(self.transition)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise InvalidShift(f"transition matrix must be square, got {t.shape}")
        if not np.all((t == 0) | (t == 1)):
            raise InvalidShift("transition matrix must be 0/1")
        if np.any(t.sum(axis=1) == 0):
            raise InvalidShift("transition matrix has an all-zero row")
        object.__setattr__(self, "transition", t.astype(np.int64))
        states = tuple(self.states) or tuple(str(i) for i in range(t.shape[0]))
        if len(states) != t.shape[0]:
            raise InvalidShift(f"{len(states)} state names for {t.shape[0]} states")
        object.__setattr__(self, "states", states)

    @property
    def size(self) -> int:
        return self.transition.shape[0]

    @property
    def is_mixing(self) -> bool:
        return _is_primitive(self.transition)

    def predecessors(self, state: int) -> np.ndarray:
        return np.flatnonzero(self.transition[:, state])

    def edges(self) -> List[Tuple[int, int]]:
        return [tuple(e) for e in np.argwhere(self.transition == 1).tolist()]


@dataclass(frozen=True)
class RoofBound:
    """r_K >= c on admissible K-step paths; m_neg bounds every partial sum."""

    k: int
    c: float
    m_neg: float


@dataclass(frozen=True, eq=False)
class ShiftSystem:
    """A shift with roof r(x_0, x_1) on edges and displacement f(x_0) in Z^d."""

    shift: MarkovShift
    roof: np.ndarray
    displacement: np.ndarray
    _bound: List[RoofBound] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = self.shift.size
        roof = np.asarray(self.roof, dtype=np.float64)
        if roof.ndim == 0:
            roof = np.full((n, n), float(roof))
        if roof.shape != (n, n):
            raise InvalidShift(f"roof table must be {n}x{n}, got {roof.shape}")
        edges = self.shift.transition == 1
        if not np.all(np.isfinite(roof[edges])):
            raise InvalidShift("roof must be finite on every admissible edge")
        roof = np.where(edges, roof, 0.0)
        f = np.asarray(self.displacement, dtype=np.int64)
        if f.ndim == 1:
            f = f.reshape(n, -1) if f.size else np.zeros((n, 0), dtype=np.int64)
        if f.shape[0] != n:
            raise InvalidShift(f"displacement needs one row per state, got {f.shape}")
        object.__setattr__(self, "roof", roof)
        object.__setattr__(self, "displacement", f)

    @property
    def size(self) -> int:
        return self.shift.size

    @property
    def d(self) -> int:
        return self.displacement.shape[1]

    @property
    def f_max(self) -> int:
        return int(np.abs(self.displacement).max()) if self.displacement.size else 0

    @property
    def weights(self) -> np.ndarray:
        """M[i, j] = T[i, j] exp(-r(i, j)); the transfer operator is M transposed."""
        return self.shift.transition * np.exp(-self.roof)

    def shifted(self, constant: float) -> "ShiftSystem":
        """Same system with roof r + constant (r + log lambda normalizes pressure)."""
        return ShiftSystem(self.shift, self.roof + constant, self.displacement)

    def roof_bound(self, max_k: Optional[int] = None) -> RoofBound:
        """Smallest K with min over K-step paths of r_K > 0, via min-plus powers.

        Raises:
            NonPositiveRoof: If no K up to ``max_k`` (default n^2 + 1) works.
        """
        if self._bound:
            return self._bound[0]
        n = self.size
        max_k = max_k or n * n + 1
        step = np.where(self.shift.transition == 1, self.roof, np.inf)
        current = step.copy()
        m_neg = min(0.0, float(current.min()))
        for k in range(1, max_k + 1):
            low = float(current.min())
            if low > 0:
                bound = RoofBound(k, low, m_neg)
                self._bound.append(bound)
                _LOGGER.debug("Roof bound K=%d C=%.6g m_neg=%.6g", k, low, m_neg)
                return bound
            m_neg = min(m_neg, low)
            current = (current[:, :, None] + step[None, :, :]).min(axis=1)
        raise NonPositiveRoof(f"no block length <= {max_k} has a positive roof sum")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "states": list(self.shift.states),
            "transition": self.shift.transition.tolist(),
            "r": self.roof.tolist(),
            "f": self.displacement.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ShiftSystem":
        transition = np.asarray(data["transition"])
        shift = MarkovShift(transition, tuple(data.get("states", ())))
        n = shift.size
        f = data.get("f")
        displacement = np.zeros((n, 0), dtype=np.int64) if f is None else np.asarray(f)
        return cls(shift, np.asarray(data["r"], dtype=np.float64), displacement)


def truncate(data: Dict[str, Any], cutoff: int) -> ShiftSystem:
    """Keep the first ``cutoff`` states of a (long or countable) shift spec.

    Raises:
        InvalidShift: If a kept state loses all its successors.
    """
    keep = slice(0, cutoff)
    transition = np.asarray(data["transition"])[keep, keep]
    if np.any(transition.sum(axis=1) == 0):
        dead = np.flatnonzero(transition.sum(axis=1) == 0).tolist()
        raise InvalidShift(f"states {dead} have no successor after truncation")
    trimmed = {
        "states": list(data.get("states", ()))[keep],
        "transition": transition.tolist(),
        "r": np.asarray(data["r"], dtype=np.float64)[keep, keep].tolist(),
    }
    if data.get("f") is not None:
        trimmed["f"] = np.asarray(data["f"])[keep].tolist()
    return ShiftSystem.from_dict(trimmed)


def full_shift(
    n: int, roof: float, displacement: Optional[Sequence] = None
) -> ShiftSystem:
    """Full shift on n symbols with a constant roof."""
    f = np.zeros((n, 0)) if displacement is None else np.asarray(displacement)
    return ShiftSystem(MarkovShift(np.ones((n, n), dtype=np.int64)), roof, f)


def lazy_walk() -> ShiftSystem:
    """Full 3-shift with steps -1, 0, 1 and roof log 3: a lazy simple random walk."""
    return ShiftSystem(
        MarkovShift(np.ones((3, 3), dtype=np.int64), ("-1", "0", "1")),
        math.log(3.0),
        np.array([[-1], [0], [1]]),
    )


def golden_mean(roof: float = 0.0) -> ShiftSystem:
    return ShiftSystem(MarkovShift(np.array([[1, 1], [1, 0]])), roof, np.zeros((2, 0)))


SYSTEMS = {
    "lazy_walk": lazy_walk,
    "golden_mean": golden_mean,
}
