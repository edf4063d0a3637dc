"""Invariants of a Z^d-cover: cusp residues, the p/h split and the constant c."""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import integrate, special
from scipy.spatial import ConvexHull, HalfspaceIntersection
from scipy.stats import qmc
from sympy.matrices.normalforms import smith_normal_form
from sympy.polys.domains import ZZ

from .errors import ConfigError, GramMissing, InvalidGram, NotSurjective
from .fuchsian import GroupPresentation, Word

_LOGGER = logging.getLogger(__name__)

QUAD_EPSREL = 1e-10
QMC_POINTS = 2**15
QMC_REPEATS = 8


@dataclass(frozen=True)
class CoverSpec:
    """phi: Gamma_0 -> Z^d as a d x k matrix; column i is the image of generator i."""

    phi: Tuple[Tuple[int, ...], ...]
    rank: int

    def __post_init__(self) -> None:
        for row in self.phi:
            if len(row) != self.rank:
                raise ConfigError(
                    f"phi row {list(row)} has {len(row)} != {self.rank} entries"
                )
        if self.d:
            snf = smith_normal_form(sympy.Matrix(self.phi), domain=ZZ)
            divisors = [snf[i, i] for i in range(min(snf.shape))]
            if self.d > self.rank or any(abs(v) != 1 for v in divisors[: self.d]):
                raise NotSurjective(
                    f"phi is not onto Z^{self.d}: elementary divisors {divisors}"
                )

    @property
    def d(self) -> int:
        return len(self.phi)

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.phi, dtype=np.int64).reshape(self.d, self.rank)

    @classmethod
    def identity(cls, rank: int) -> "CoverSpec":
        """The homology cover of a free group (phi = abelianization)."""
        rows = tuple(tuple(int(i == j) for j in range(rank)) for i in range(rank))
        return cls(rows, rank)

    @classmethod
    def trivial(cls, rank: int) -> "CoverSpec":
        """d = 0: the cover is the base surface itself."""
        return cls((), rank)

    def image(self, exponents: Sequence[int]) -> Tuple[int, ...]:
        return tuple(sum(r * e for r, e in zip(row, exponents)) for row in self.phi)

    def images(self, exponents: np.ndarray) -> np.ndarray:
        """Row-wise images of an (n, rank) exponent array, shape (n, d)."""
        return exponents @ self.matrix.T

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "phi": [list(row) for row in self.phi]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], rank: int) -> "CoverSpec":
        phi = tuple(tuple(int(v) for v in row) for row in data.get("phi", []))
        if "d" in data and int(data["d"]) != len(phi):
            raise ConfigError(f"d = {data['d']} but phi has {len(phi)} rows")
        return cls(phi, rank)

    def get_hash(self) -> str:
        hasher = hashlib.sha256()
        hasher.update(json.dumps(self.to_dict(), sort_keys=True).encode("utf-8"))
        return hasher.hexdigest()


def homology_cover(g: GroupPresentation) -> CoverSpec:
    return CoverSpec.identity(g.rank)


@dataclass(frozen=True)
class HGram:
    """Gram matrix Q of the h-norm on the orthonormal basis of E_h."""

    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise InvalidGram(f"Gram matrix must be square, got shape {q.shape}")
        if not np.allclose(q, q.T, rtol=1e-12, atol=1e-12):
            raise InvalidGram("Gram matrix is not symmetric")
        if q.size and np.linalg.eigvalsh(q).min() <= 0:
            raise InvalidGram("Gram matrix is not positive-definite")
        object.__setattr__(self, "q", q)

    @property
    def size(self) -> int:
        return self.q.shape[0]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HGram":
        return cls(np.asarray(data["q"], dtype=np.float64))

    def to_dict(self) -> Dict[str, Any]:
        return {"q": self.q.tolist()}


@dataclass(frozen=True)
class CoverInvariants:
    """Residue matrix, the p/h decomposition and the p-integral of a cover."""

    residues: np.ndarray  # (cusps, d), exact integers
    p: int
    h: int
    basis_ep: np.ndarray  # (p, d), orthonormal rows
    basis_eh: np.ndarray  # (h, d), orthonormal rows
    m0: float
    c_p_factor: float
    c_p_error: float = 0.0
    spec: Optional[CoverSpec] = field(default=None, compare=False)

    @property
    def d(self) -> int:
        return self.p + self.h

    @property
    def norm_rows(self) -> np.ndarray:
        """Residue rows restricted to E_p and scaled by 1/m0, shape (cusps, p)."""
        return self.residues.astype(np.float64) @ self.basis_ep.T / self.m0

    def predicted_exponent(self, kind: str = "mixing") -> float:
        """p + h/2 for mixing and orbit counts, one more for prime geodesics."""
        alpha = self.p + self.h / 2.0
        return alpha + 1.0 if kind == "geodesics" else alpha

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "p": self.p,
            "h": self.h,
            "m0": self.m0,
            "residues": self.residues.tolist(),
            "basis_ep": self.basis_ep.tolist(),
            "basis_eh": self.basis_eh.tolist(),
            "c_p_factor": self.c_p_factor,
            "c_p_error": self.c_p_error,
        }


@dataclass(frozen=True)
class ConstantResult:
    c: float
    exact: bool
    p_factor: float
    h_factor: Optional[float]
    error: float


def surface_area(genus: int, cusps: int) -> float:
    """Gauss-Bonnet area 2 pi (2g - 2 + cusps)."""
    area = 2.0 * math.pi * (2 * genus - 2 + cusps)
    if area <= 0:
        raise ConfigError(f"genus {genus} with {cusps} cusps is not hyperbolic")
    return area


def area(g: GroupPresentation) -> float:
    return surface_area(g.genus, g.cusp_count)


def residue_matrix(g: GroupPresentation, spec: CoverSpec) -> np.ndarray:
    """Row j is phi(abelianize(cusp word j))."""
    rows = [spec.image(w.abelianize(g.rank)) for w in g.cusp_words]
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), spec.d)


def _split(residues: np.ndarray, p: int, d: int) -> Tuple[np.ndarray, np.ndarray]:
    if d == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    _, _, vt = np.linalg.svd(residues.astype(np.float64), full_matrices=True)
    return vt[:p], vt[p:]


def invariants(
    g: GroupPresentation, spec: CoverSpec, method: str = "quadrature"
) -> CoverInvariants:
    """Residues, p = rank R (exact), E_p = row space of R, E_h = ker R, p-integral."""
    if spec.rank != g.rank:
        raise ConfigError(f"phi has {spec.rank} columns, the group has rank {g.rank}")
    residues = residue_matrix(g, spec)
    p = int(sympy.Matrix(residues.tolist()).rank()) if spec.d else 0
    basis_ep, basis_eh = _split(residues, p, spec.d)
    m0 = area(g)
    draft = CoverInvariants(
        residues, p, spec.d - p, basis_ep, basis_eh, m0, 0.0, 0.0, spec
    )
    value, error = p_integral(draft, method=method)
    _LOGGER.debug("Cover of %s: p=%d h=%d, p-integral %.12g", g.name, p, draft.h, value)
    return CoverInvariants(
        residues, p, draft.h, basis_ep, basis_eh, m0, value, error, spec
    )


def p_norm(inv: CoverInvariants, x: Sequence[float], ambient: bool = False) -> float:
    """(1/m0) sum_j |(R x)_j|, for x in E_p coordinates or in R^d when ``ambient``."""
    x = np.asarray(x, dtype=np.float64)
    if not ambient:
        x = inv.basis_ep.T @ x
    return float(np.abs(inv.residues @ x).sum() / inv.m0)


def kernel_member(spec: CoverSpec, w: Word) -> bool:
    return not any(spec.image(w.abelianize(spec.rank)))


def _circle_breaks(rows: np.ndarray) -> list:
    points = set()
    for w0, w1 in rows:
        if w0 == 0 and w1 == 0:
            continue
        base = math.atan2(w0, -w1) % math.pi
        points.update((base, base + math.pi))
    return sorted(v for v in points if 0.0 < v < 2.0 * math.pi)


def radial_integral(
    rows: np.ndarray, xi: Optional[np.ndarray] = None, seed: int = 0
) -> Tuple[float, float]:
    """Integral over R^p of exp(i<xi, x> - sum_j |rows_j . x|), with an error estimate.

    In polar coordinates it is (p-1)! times the sphere integral of
    Re[(N(theta) - i<xi, theta>)^-p]. The sphere is handled exactly for p = 1,
    by adaptive quadrature with the kinks as breakpoints for p = 2, by nested
    quadrature for p = 3 and by scrambled Sobol points beyond.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    p = rows.shape[1]
    if p == 0:
        return 1.0, 0.0
    xi = np.zeros(p) if xi is None else np.asarray(xi, dtype=np.float64)
    scale = math.factorial(p - 1)

    def kernel(theta: np.ndarray) -> np.ndarray:
        theta = np.atleast_2d(theta)
        norm = np.abs(theta @ rows.T).sum(axis=1)
        return np.real((norm - 1j * (theta @ xi)) ** (-p))

    if p == 1:
        return float(kernel(np.array([[1.0], [-1.0]])).sum()), 0.0
    if p == 2:
        value, error = integrate.quad(
            lambda phi: kernel(np.array([math.cos(phi), math.sin(phi)]))[0],
            0.0,
            2.0 * math.pi,
            points=_circle_breaks(rows) or None,
            limit=400,
            epsrel=QUAD_EPSREL,
        )
        return scale * value, scale * error
    if p == 3:

        def inner(polar: float) -> float:
            s, c = math.sin(polar), math.cos(polar)
            value, _ = integrate.quad(
                lambda phi: kernel(
                    np.array([s * math.cos(phi), s * math.sin(phi), c])
                )[0],
                0.0,
                2.0 * math.pi,
                limit=200,
                epsrel=QUAD_EPSREL,
            )
            return s * value

        value, error = integrate.quad(inner, 0.0, math.pi, limit=200, epsrel=1e-9)
        return scale * value, scale * error
    sphere = 2.0 * math.pi ** (p / 2.0) / special.gamma(p / 2.0)
    rng = np.random.default_rng(seed)
    estimates = []
    for _ in range(QMC_REPEATS):
        points = qmc.Sobol(d=p, scramble=True, seed=rng).random(QMC_POINTS)
        gauss = special.ndtri(np.clip(points, 1e-15, 1 - 1e-15))
        theta = gauss / np.linalg.norm(gauss, axis=1, keepdims=True)
        estimates.append(sphere * kernel(theta).mean())
    estimates = np.asarray(estimates)
    return (
        float(scale * estimates.mean()),
        float(scale * estimates.std(ddof=1) / math.sqrt(QMC_REPEATS)),
    )


def polytope_integral(rows: np.ndarray) -> float:
    """p! vol{x : sum_j |rows_j . x| <= 1}, the same integral at xi = 0."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    p = rows.shape[1]
    if p == 0:
        return 1.0
    if p == 1:
        return 2.0 / np.abs(rows[:, 0]).sum()
    cusps = rows.shape[0]
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * cusps)).reshape(cusps, -1).T
    halfspaces = np.hstack([signs @ rows, -np.ones((signs.shape[0], 1))])
    polytope = HalfspaceIntersection(halfspaces, np.zeros(p))
    return math.factorial(p) * ConvexHull(polytope.intersections).volume


def p_integral(inv: CoverInvariants, method: str = "quadrature") -> Tuple[float, float]:
    """The integral of exp(-||x||_p) over E_p."""
    if method == "polytope":
        return polytope_integral(inv.norm_rows), 0.0
    if method != "quadrature":
        raise ConfigError(f"unknown integration method {method!r}")
    return radial_integral(inv.norm_rows)


def h_integral(gram: HGram) -> float:
    """pi^(h/2) / sqrt(det Q)."""
    return math.pi ** (gram.size / 2.0) / math.sqrt(np.linalg.det(gram.q))


def constant_c(
    inv: CoverInvariants, gram: Optional[HGram] = None, exact: bool = False
) -> ConstantResult:
    """c = (p-integral) (h-integral) / ((2 pi)^d m0).

    Without a Gram matrix and h > 0 only the p-factor enters and the result is
    flagged inexact.

    Raises:
        GramMissing: If h > 0, no Gram matrix is given and ``exact`` is set.
        InvalidGram: If the Gram matrix is not h x h.
    """
    norm = (2.0 * math.pi) ** inv.d * inv.m0
    if inv.h == 0:
        return ConstantResult(
            inv.c_p_factor / norm, True, inv.c_p_factor, 1.0, inv.c_p_error / norm
        )
    if gram is None:
        if exact:
            raise GramMissing(f"h = {inv.h} > 0 and no Gram matrix was supplied")
        _LOGGER.warning("No Gram matrix for h = %d; returning the p-factor only", inv.h)
        return ConstantResult(
            inv.c_p_factor / norm, False, inv.c_p_factor, None, inv.c_p_error / norm
        )
    if gram.size != inv.h:
        raise InvalidGram(
            f"Gram matrix is {gram.size}x{gram.size}, need {inv.h}x{inv.h}"
        )
    h_factor = h_integral(gram)
    return ConstantResult(
        inv.c_p_factor * h_factor / norm,
        True,
        inv.c_p_factor,
        h_factor,
        inv.c_p_error * h_factor / norm,
    )


def limit_density(
    inv: CoverInvariants, xi: Sequence[float], gram: Optional[HGram] = None
) -> float:
    """F(xi) = (2 pi)^-d F_p(xi_p) F_h(xi_h), so that c = F(0) / m0.

    F_p integrates exp(i<xi_p, x> - ||x||_p) over E_p and F_h integrates
    exp(i<xi_h, y> - Q(y)) over E_h, which is Gaussian in closed form.

    Raises:
        GramMissing: If h > 0 and no Gram matrix is given.
    """
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape != (inv.d,):
        raise ConfigError(f"xi must have {inv.d} coordinates")
    xi_p = inv.basis_ep @ xi
    if np.any(xi_p):
        f_p, _ = radial_integral(inv.norm_rows, xi_p)
    else:
        f_p = inv.c_p_factor
    f_h = 1.0
    if inv.h:
        if gram is None:
            raise GramMissing(f"h = {inv.h} > 0 and no Gram matrix was supplied")
        if gram.size != inv.h:
            raise InvalidGram(
                f"Gram matrix is {gram.size}x{gram.size}, need {inv.h}x{inv.h}"
            )
        xi_h = inv.basis_eh @ xi
        f_h = h_integral(gram) * math.exp(-xi_h @ np.linalg.solve(gram.q, xi_h) / 4.0)
    return f_p * f_h / (2.0 * math.pi) ** inv.d
