"""Pydantic schemas for every JSON document LocalMix reads or writes."""
from __future__ import annotations

import hashlib
import json
import math
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field

from . import __version__
from .cover import CoverSpec, HGram
from .fuchsian import GroupPresentation
from .mixing import FlowBox
from .symbolic import ShiftSystem, truncate

Endpoint = Optional[Union[float, str]]


class SideModel(BaseModel):
    """One side of the fundamental polygon."""

    endpoints: Tuple[Endpoint, Endpoint] = Field(
        ..., description="Ideal endpoints; null or 'inf' is the point at infinity"
    )
    pairing: List[int] = Field(
        ..., description="Pairing word as signed 1-based generator indices"
    )


class GroupSpecModel(BaseModel):
    """A free Fuchsian group with its cusp words and side-paired polygon."""

    name: str = Field(default="custom", description="Name used in reports")
    generators: List[Tuple[Union[int, float], ...]] = Field(
        ..., description="Free generators as [a, b, c, d] with ad - bc = 1"
    )
    cusp_words: List[List[int]] = Field(
        ..., description="One parabolic word per cusp, signed 1-based indices"
    )
    genus: int = Field(..., ge=0, description="Genus of the quotient surface")
    sides: List[SideModel] = Field(..., description="Sides of the polygon")
    interior: Tuple[float, float] = Field(
        ..., description="A point strictly inside the polygon"
    )

    def to_presentation(self) -> GroupPresentation:
        return GroupPresentation.from_dict(self.model_dump())


class CoverSpecModel(BaseModel):
    """Surjection phi: Gamma_0 -> Z^d."""

    d: Optional[int] = Field(default=None, ge=0, description="Rank of the cover")
    phi: List[List[int]] = Field(
        ..., description="d rows, one column per generator"
    )

    def to_cover(self, rank: int) -> CoverSpec:
        return CoverSpec.from_dict(self.model_dump(exclude_none=True), rank)


class HGramModel(BaseModel):
    """Gram matrix of the h-norm on the orthonormal basis of E_h."""

    q: List[List[float]] = Field(..., description="Symmetric positive-definite matrix")

    def to_gram(self) -> HGram:
        return HGram.from_dict(self.model_dump())


class ShiftSpecModel(BaseModel):
    """Topological Markov shift with roof and displacement tables."""

    states: List[str] = Field(default_factory=list, description="State names")
    transition: List[List[int]] = Field(..., description="0/1 transition matrix")
    r: List[List[float]] = Field(..., description="Roof value per edge (i, j)")
    f: Optional[List[List[int]]] = Field(
        default=None, description="Displacement in Z^d per state"
    )
    cutoff: Optional[int] = Field(
        default=None, ge=1, description="Keep only the first states of a long spec"
    )

    def to_system(self) -> ShiftSystem:
        data = self.model_dump(exclude={"cutoff"})
        if self.cutoff is not None:
            return truncate(data, self.cutoff)
        return ShiftSystem.from_dict(data)


class BoxSpecModel(BaseModel):
    """Flow box: base rectangle, arc of directions and sheet."""

    xrange: Tuple[float, float] = Field(..., description="Range of Re z")
    yrange: Tuple[float, float] = Field(..., description="Range of Im z")
    arc: Tuple[float, float] = Field(
        default=(-math.pi, math.pi), description="Arc of directions in radians"
    )
    sheet: List[int] = Field(default_factory=list, description="Sheet in Z^d")

    def to_box(self) -> FlowBox:
        return FlowBox.from_dict(self.model_dump())


class ExperimentConfig(BaseModel):
    """Everything that determines an experiment's output."""

    command: str = Field(..., description="Sub-command that produced the output")
    group: Optional[str] = Field(default=None, description="Group name")
    group_hash: Optional[str] = Field(default=None, description="SHA-256 of the group")
    phi: Optional[List[List[int]]] = Field(default=None, description="Cover map")
    settings: Dict[str, Any] = Field(
        default_factory=dict, description="Remaining options, defaults included"
    )

    def get_hash(self) -> str:
        hasher = hashlib.sha256()
        hasher.update(
            json.dumps(self.model_dump(), sort_keys=True, default=str).encode("utf-8")
        )
        return hasher.hexdigest()


class Provenance(BaseModel):
    """Header attached to every output file."""

    package: str = Field(default="localmix")
    version: str = Field(default=__version__)
    config_hash: str = Field(..., description="SHA-256 of the experiment config")
    seed: Optional[int] = Field(default=None, description="Monte Carlo seed")
    threads: int = Field(default=1, description="Worker processes used")
    config: ExperimentConfig

    @classmethod
    def for_config(
        cls, config: ExperimentConfig, seed: Optional[int] = None, threads: int = 1
    ) -> "Provenance":
        return cls(
            config_hash=config.get_hash(), seed=seed, threads=threads, config=config
        )

    def header_lines(self) -> List[str]:
        lines = [
            f"{self.package} {self.version}",
            f"command: {self.config.command}",
            f"config_hash: {self.config_hash}",
            f"threads: {self.threads}",
        ]
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        if self.config.group:
            lines.append(f"group: {self.config.group} ({self.config.group_hash})")
        if self.config.phi is not None:
            lines.append(f"phi: {json.dumps(self.config.phi)}")
        for key in sorted(self.config.settings):
            lines.append(f"{key}: {json.dumps(self.config.settings[key], default=str)}")
        return lines


class InvariantsReport(BaseModel):
    """Cover invariants and the limit constant."""

    group: str
    d: int
    p: int
    h: int
    m0: float = Field(..., description="Area of the base surface")
    residues: List[List[int]]
    basis_ep: List[List[float]]
    basis_eh: List[List[float]]
    c: float = Field(..., description="Leading constant of the local limit")
    c_exact: bool = Field(..., description="False when the h-factor was omitted")
    p_factor: float
    h_factor: Optional[float] = None
    error: float = Field(default=0.0, description="Quadrature error estimate for c")
    exponent_mixing: float = Field(..., description="p + h/2")
    exponent_geodesics: float = Field(..., description="p + h/2 + 1")


class FitReportModel(BaseModel):
    """Exponent discrimination result."""

    model: str
    alphas: List[float]
    constants: List[float]
    residuals: List[float]
    selected: float
    predicted: Optional[float] = None
    window: Tuple[float, float]
    poor_fit: bool
    threshold: float
