"""Runtime knobs shared by the enumeration and Monte Carlo engines."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict


@dataclass(frozen=True)
class EnumerationBudget:
    """Limits for ball and conjugacy-class enumeration."""

    t_max: float = 20.0
    node_cap: int = 500_000_000
    margin: float = 4.0
    axis_margin: float = 3.0
    cusp_cutoff: float = 1e6
    max_reduction_steps: int = 100_000

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EnumerationBudget":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def get_hash(self) -> str:
        return _hash_dict(self.to_dict())


@dataclass(frozen=True)
class SamplingPlan:
    """Monte Carlo sample count, seed and batching.

    ``step`` is the flow increment between fundamental-domain reductions.
    """

    samples: int = 1_000_000
    seed: int = 0
    threads: int = 1
    batch: int = 65_536
    step: float = 0.5

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SamplingPlan":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def get_hash(self) -> str:
        return _hash_dict(self.to_dict())


def _hash_dict(data: Dict[str, Any]) -> str:
    hasher = hashlib.sha256()
    hasher.update(json.dumps(data, sort_keys=True).encode("utf-8"))
    return hasher.hexdigest()
