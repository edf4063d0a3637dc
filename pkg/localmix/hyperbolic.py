"""PSL2(R) on the upper half-plane and the geodesic flow on its unit tangent bundle."""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from numbers import Integral, Real
from typing import Union

from .errors import InvalidPoint, NotHyperbolic

_LOGGER = logging.getLogger(__name__)

Scalar = Union[int, float]

FLOAT_TOL = 1e-12


class IsometryType(str, Enum):
    """Conjugacy type of a non-trivial element of PSL2(R)."""

    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


def _is_int(value: Scalar) -> bool:
    return isinstance(value, Integral) and not isinstance(value, bool)


@dataclass(frozen=True)
class Moebius:
    """A Moebius transformation z -> (az+b)/(cz+d) modulo sign.

    Entries are either all Python ints (exact, arbitrary precision) or floats.
    Use :meth:`of` or :meth:`from_real` rather than the raw constructor; both
    return the sign-canonical representative with a > 0, or a == 0 and b > 0.
    """

    a: Scalar
    b: Scalar
    c: Scalar
    d: Scalar

    @classmethod
    def of(cls, a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> "Moebius":
        """Build a determinant-one element, canonicalizing the sign.

        Raises:
            ValueError: If an integer-backed matrix does not have det exactly 1,
                or a float matrix is off by more than 1e-9.
        """
        entries = (a, b, c, d)
        if all(_is_int(v) for v in entries):
            if a * d - b * c != 1:
                raise ValueError(f"det({entries}) != 1")
            return cls._canonical(int(a), int(b), int(c), int(d))
        a, b, c, d = (float(v) for v in entries)
        det = a * d - b * c
        if abs(det - 1.0) > 1e-9:
            raise ValueError(f"det({entries}) = {det} != 1")
        return cls._canonical(a, b, c, d)

    @classmethod
    def from_real(cls, a: float, b: float, c: float, d: float) -> "Moebius":
        """Build a float element from any matrix with positive determinant."""
        det = a * d - b * c
        if not det > 0:
            raise ValueError(f"determinant {det} is not positive")
        s = math.sqrt(det)
        return cls._canonical(a / s, b / s, c / s, d / s)

    @classmethod
    def identity(cls) -> "Moebius":
        return cls(1, 0, 0, 1)

    @classmethod
    def _canonical(cls, a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> "Moebius":
        if a < 0 or (a == 0 and b < 0):
            return cls(-a, -b, -c, -d)
        return cls(a, b, c, d)

    @property
    def is_exact(self) -> bool:
        return all(_is_int(v) for v in (self.a, self.b, self.c, self.d))

    def canonical(self) -> "Moebius":
        return self._canonical(self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "Moebius") -> "Moebius":
        return self.compose(other)

    def compose(self, other: "Moebius") -> "Moebius":
        """Return self * other (apply other first)."""
        return self._canonical(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Moebius":
        return self._canonical(self.d, -self.b, -self.c, self.a)

    def __pow__(self, n: int) -> "Moebius":
        base = self if n >= 0 else self.inverse()
        result = Moebius.identity() if self.is_exact else Moebius(1.0, 0.0, 0.0, 1.0)
        n = abs(n)
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    @property
    def trace(self) -> Scalar:
        return self.a + self.d

    @property
    def norm2(self) -> Scalar:
        """a^2 + b^2 + c^2 + d^2, which equals 2 cosh d(i, m i)."""
        return self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d

    def to_float(self) -> "Moebius":
        return Moebius(float(self.a), float(self.b), float(self.c), float(self.d))

    def as_tuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def __str__(self) -> str:
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


@dataclass(frozen=True)
class PointH2:
    """A point x + iy of the upper half-plane."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidPoint(f"non-finite point ({self.x}, {self.y})")
        if not self.y > 0:
            raise InvalidPoint(
                f"point ({self.x}, {self.y}) is not in the upper half-plane"
            )

    @classmethod
    def from_complex(cls, z: complex) -> "PointH2":
        return cls(z.real, z.imag)

    def as_complex(self) -> complex:
        return complex(self.x, self.y)


ORIGIN = PointH2(0.0, 1.0)


def apply(m: Moebius, z: PointH2) -> PointH2:
    """Act by m on z.

    Uses Im(mz) = Im z / |cz+d|^2 so the result stays in the half-plane even
    when the complex quotient would lose the imaginary part.
    """
    a, b, c, d = (float(v) for v in m.as_tuple())
    x, y = z.x, z.y
    denom = (c * x + d) ** 2 + (c * y) ** 2
    return PointH2(((a * x + b) * (c * x + d) + a * c * y * y) / denom, y / denom)


def cosh_dist(z: PointH2, w: PointH2) -> float:
    return 1.0 + ((z.x - w.x) ** 2 + (z.y - w.y) ** 2) / (2.0 * z.y * w.y)


def dist(z: PointH2, w: PointH2) -> float:
    """Hyperbolic distance (curvature -1)."""
    # sinh(d/2) = |z - w| / (2 sqrt(Im z Im w)) avoids arccosh cancellation near 0.
    chord = math.hypot(z.x - w.x, z.y - w.y)
    return 2.0 * math.asinh(chord / (2.0 * math.sqrt(z.y * w.y)))


def dist_from_origin(m: Moebius) -> float:
    """d(i, m i), from cosh d = (a^2+b^2+c^2+d^2)/2.

    The subtraction of 2 is exact for integer-backed matrices.
    """
    excess = m.norm2 - 2
    if excess <= 0:
        return 0.0
    return 2.0 * math.asinh(math.sqrt(float(excess) / 4.0))


def classify(m: Moebius) -> IsometryType:
    """Classify by |trace|; exact for integer-backed elements."""
    if m.is_exact:
        if m.b == 0 and m.c == 0 and m.a == m.d:
            return IsometryType.IDENTITY
        tr = abs(m.trace)
        if tr == 2:
            return IsometryType.PARABOLIC
        return IsometryType.HYPERBOLIC if tr > 2 else IsometryType.ELLIPTIC
    if abs(m.b) <= FLOAT_TOL and abs(m.c) <= FLOAT_TOL and abs(m.a - m.d) <= FLOAT_TOL:
        return IsometryType.IDENTITY
    tr = abs(m.trace)
    if abs(tr - 2.0) <= FLOAT_TOL:
        return IsometryType.PARABOLIC
    return IsometryType.HYPERBOLIC if tr > 2.0 else IsometryType.ELLIPTIC


def translation_length(m: Moebius) -> float:
    """Length 2 arccosh(|tr|/2) of the closed geodesic of a hyperbolic element.

    Raises:
        NotHyperbolic: If |trace| <= 2.
    """
    if classify(m) is not IsometryType.HYPERBOLIC:
        raise NotHyperbolic(f"{m} has |trace| <= 2")
    return 2.0 * math.acosh(abs(float(m.trace)) / 2.0)


def length_from_trace(trace: Scalar) -> float:
    return 2.0 * math.acosh(abs(float(trace)) / 2.0)


@dataclass(frozen=True)
class UnitTangent:
    """A unit tangent vector g.v0, v0 the upward vector at i, stored as the frame g."""

    frame: Moebius

    @classmethod
    def from_point_angle(cls, z: PointH2, angle: float) -> "UnitTangent":
        """Frame of the unit vector at z pointing at Euclidean angle ``angle``.

        The rotation k_phi = [[cos, sin], [-sin, cos]] fixes i and turns v0 by
        2 phi, so phi = (angle - pi/2) / 2.
        """
        phi = (angle - math.pi / 2.0) / 2.0
        cos, sin = math.cos(phi), math.sin(phi)
        sy = math.sqrt(z.y)
        lift = Moebius.from_real(sy, z.x / sy, 0.0, 1.0 / sy)
        return cls(lift @ Moebius.from_real(cos, sin, -sin, cos))

    @property
    def base_point(self) -> PointH2:
        return apply(self.frame, ORIGIN)

    @property
    def angle(self) -> float:
        """Direction in (-pi, pi]; the derivative of g at i is 1/(ci+d)^2."""
        w = complex(float(self.frame.c), 0.0) * 1j + float(self.frame.d)
        theta = math.pi / 2.0 - 2.0 * cmath.phase(w)
        return math.atan2(math.sin(theta), math.cos(theta))


def flow_matrix(t: float) -> Moebius:
    """a_t = diag(e^{t/2}, e^{-t/2})."""
    return Moebius(math.exp(t / 2.0), 0.0, 0.0, math.exp(-t / 2.0))


def geodesic_flow(v: UnitTangent, t: float) -> UnitTangent:
    """Right translation v -> v a_t."""
    if t == 0:
        return v
    return UnitTangent(v.frame.to_float() @ flow_matrix(t))
