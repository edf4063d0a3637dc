"""Free Fuchsian groups with cusp words and a side-paired fundamental polygon."""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import CuspEscape, InvalidPresentation
from ..hyperbolic import IsometryType, Moebius, PointH2, apply, classify
from .words import Word

_LOGGER = logging.getLogger(__name__)

Endpoint = Optional[float]  # None is the point at infinity

SIDE_TOL = 1e-12
PAIRING_TOL = 1e-9

_INFINITY = ("inf", "+inf", "oo", "infinity")


def _parse_endpoint(value: Union[str, int, float, None]) -> Endpoint:
    if value is None:
        return None
    if isinstance(value, str):
        text = value.strip().lower()
        if text in _INFINITY:
            return None
        return float(Fraction(text))
    return float(value)


def _format_endpoint(value: Endpoint) -> Union[str, float]:
    return "inf" if value is None else value


@dataclass(frozen=True)
class Side:
    """A geodesic side of the polygon with the word pairing it onto its partner.

    ``orientation`` is chosen so that :meth:`outside` is negative on the
    polygon's interior.
    """

    start: Endpoint
    end: Endpoint
    pairing: Word
    orientation: float = 1.0

    def __post_init__(self) -> None:
        if self.start is None and self.end is None:
            raise InvalidPresentation("a side cannot join infinity to itself")
        if self.start is not None and self.start == self.end:
            raise InvalidPresentation(f"degenerate side at {self.start}")

    @property
    def is_vertical(self) -> bool:
        return self.start is None or self.end is None

    @property
    def foot(self) -> float:
        return self.end if self.start is None else self.start

    @property
    def center(self) -> float:
        return 0.5 * (self.start + self.end)

    @property
    def radius(self) -> float:
        return 0.5 * abs(self.end - self.start)

    def offset(self, x, y):
        """sinh of the signed distance to the geodesic; floats or numpy arrays."""
        if self.is_vertical:
            return (x - self.foot) / y
        r = self.radius
        return ((x - self.center) ** 2 + y * y - r * r) / (2.0 * r * y)

    def outside(self, x, y):
        return self.orientation * self.offset(x, y)

    def sample(self, count: int = 5) -> List[PointH2]:
        """Points spread along the side, away from its ideal endpoints."""
        points = []
        for k in range(1, count + 1):
            s = k / (count + 1)
            if self.is_vertical:
                points.append(PointH2(self.foot, math.exp(4.0 * (s - 0.5))))
            else:
                angle = math.pi * s
                points.append(
                    PointH2(
                        self.center + self.radius * math.cos(angle),
                        self.radius * math.sin(angle),
                    )
                )
        return points

    def oriented(self, interior: PointH2) -> "Side":
        value = self.offset(interior.x, interior.y)
        if abs(value) <= SIDE_TOL:
            raise InvalidPresentation(f"interior point {interior} lies on side {self}")
        return Side(self.start, self.end, self.pairing, -1.0 if value > 0 else 1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "endpoints": [_format_endpoint(self.start), _format_endpoint(self.end)],
            "pairing": self.pairing.to_signed(),
        }


@dataclass(frozen=True)
class GroupPresentation:
    """A torsion-free non-uniform lattice presented as a free group.

    Build through :meth:`build` (or :meth:`from_dict`), which runs the
    load-time checks and orients the sides.
    """

    name: str
    generators: Tuple[Moebius, ...]
    cusp_words: Tuple[Word, ...]
    genus: int
    sides: Tuple[Side, ...]
    interior: PointH2
    partners: Tuple[int, ...] = ()
    moves: Tuple[Moebius, ...] = field(default=(), repr=False, compare=False)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def cusp_count(self) -> int:
        return len(self.cusp_words)

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - self.cusp_count

    @property
    def area(self) -> float:
        """Gauss-Bonnet area 2 pi (2g - 2 + n)."""
        return -2.0 * math.pi * self.euler_characteristic

    @property
    def is_arithmetic(self) -> bool:
        """All generators in SL2(Z)."""
        return all(m.is_exact for m in self.generators)

    @classmethod
    def build(
        cls,
        name: str,
        generators: Sequence[Moebius],
        cusp_words: Sequence[Word],
        genus: int,
        sides: Sequence[Side],
        interior: PointH2,
    ) -> "GroupPresentation":
        """Validate and assemble a presentation.

        Raises:
            InvalidPresentation: If a cusp word is not parabolic, the boundary
                relation fails, a pairing does not carry its side onto another
                side, or the pairings do not generate the group.
        """
        oriented = tuple(side.oriented(interior) for side in sides)
        draft = cls(
            name, tuple(generators), tuple(cusp_words), genus, oriented, interior
        )
        draft._check_cusps()
        partners = draft._check_pairings()
        draft._check_generation()
        moves = tuple(evaluate(draft, side.pairing).to_float() for side in oriented)
        _LOGGER.debug(
            "Presentation %s: rank %d, %d cusps, genus %d",
            name,
            draft.rank,
            draft.cusp_count,
            genus,
        )
        return cls(
            name,
            draft.generators,
            draft.cusp_words,
            genus,
            oriented,
            interior,
            partners,
            moves,
        )

    def _check_cusps(self) -> None:
        if not self.cusp_words:
            raise InvalidPresentation("a non-uniform lattice needs a cusp word")
        expected_rank = 2 * self.genus + self.cusp_count - 1
        if self.rank != expected_rank:
            raise InvalidPresentation(
                f"rank {self.rank} != 2g + (cusps - 1) = {expected_rank}"
            )
        for word in self.cusp_words:
            kind = classify(evaluate(self, word))
            if kind is not IsometryType.PARABOLIC:
                raise InvalidPresentation(
                    f"cusp word {word} is {kind.value}, not parabolic"
                )
        product = Word.identity()
        for word in self.cusp_words:
            product = product * word
        relation = Word.identity()
        for i in range(self.genus):
            x, y = Word.generator(2 * i), Word.generator(2 * i + 1)
            relation = relation * x * y * x.inverse() * y.inverse()
        if product != relation:
            raise InvalidPresentation(
                f"cusp word product {product} is not the surface relation {relation}"
            )

    def _check_pairings(self) -> Tuple[int, ...]:
        partners = []
        for index, side in enumerate(self.sides):
            move = evaluate(self, side.pairing)
            images = [apply(move, z) for z in side.sample()]
            match = None
            for other_index, other in enumerate(self.sides):
                if other_index == index:
                    continue
                if all(abs(other.offset(w.x, w.y)) < PAIRING_TOL for w in images):
                    match = other_index
                    break
            if match is None:
                raise InvalidPresentation(
                    f"pairing {side.pairing} does not carry side {index} onto a side"
                )
            partners.append(match)
        return tuple(partners)

    def _check_generation(self) -> None:
        if not generates_free_group([side.pairing for side in self.sides], self.rank):
            raise InvalidPresentation("side pairings do not generate the group")

    def hash(self) -> str:
        """Stable SHA-256 of the canonical JSON form."""
        hasher = hashlib.sha256()
        hasher.update(json.dumps(self.to_dict(), sort_keys=True).encode("utf-8"))
        return hasher.hexdigest()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "generators": [list(m.as_tuple()) for m in self.generators],
            "cusp_words": [w.to_signed() for w in self.cusp_words],
            "genus": self.genus,
            "sides": [side.to_dict() for side in self.sides],
            "interior": [self.interior.x, self.interior.y],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GroupPresentation":
        """Create from a :class:`localmix.schemas.GroupSpecModel` document."""
        try:
            generators = [Moebius.of(*entries) for entries in data["generators"]]
            cusp_words = [Word.from_signed(w) for w in data["cusp_words"]]
            sides = [
                Side(
                    _parse_endpoint(s["endpoints"][0]),
                    _parse_endpoint(s["endpoints"][1]),
                    Word.from_signed(s["pairing"]),
                )
                for s in data["sides"]
            ]
        except (KeyError, TypeError, ValueError) as err:
            raise InvalidPresentation(f"malformed group document: {err}") from err
        return cls.build(
            data.get("name", "custom"),
            generators,
            cusp_words,
            int(data["genus"]),
            sides,
            PointH2(*data["interior"]),
        )


def evaluate(g: GroupPresentation, w: Word) -> Moebius:
    """Multiply out a word; exact for integer generators."""
    result = Moebius.identity()
    inverses = [m.inverse() for m in g.generators]
    for gen, sign in w:
        if gen >= g.rank:
            raise ValueError(f"letter {gen} outside rank {g.rank}")
        result = result @ (g.generators[gen] if sign > 0 else inverses[gen])
    return result


def generates_free_group(words: Sequence[Word], rank: int) -> bool:
    """Whether ``words`` generate the free group of the given rank.

    Folds the bouquet of loops spelled by the words (Stallings) and checks
    that every generator reads as a loop at the base vertex.
    """
    parent: List[int] = [0]
    adjacency: Dict[int, Dict[Tuple[int, int], int]] = {0: {}}

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def new_vertex() -> int:
        parent.append(len(parent))
        adjacency[parent[-1]] = {}
        return parent[-1]

    work: List[Tuple[int, Tuple[int, int], int]] = []
    for word in words:
        current = 0
        for i, letter in enumerate(word.letters):
            target = 0 if i == len(word.letters) - 1 else new_vertex()
            work.append((current, letter, target))
            current = target
    while work:
        source, (gen, sign), target = work.pop()
        forward = (source, (gen, sign), target)
        backward = (target, (gen, -sign), source)
        for u, label, v in (forward, backward):
            u, v = find(u), find(v)
            existing = adjacency[u].get(label)
            if existing is None:
                adjacency[u][label] = v
                continue
            keep = find(existing)
            if keep == v:
                continue
            # fold: v is identified with keep, its edges are re-inserted
            parent[v] = keep
            for other_label, other_target in adjacency.pop(v).items():
                work.append((keep, other_label, other_target))
    base = find(0)
    for gen in range(rank):
        target = adjacency[base].get((gen, 1))
        if target is None or find(target) != base:
            return False
    return True


def reduce_point(
    g: GroupPresentation,
    z: PointH2,
    cutoff: float = 1e6,
    max_steps: int = 100_000,
) -> Tuple[PointH2, Word]:
    """Move z into the closed polygon, returning (z', w) with evaluate(w) z' = z.

    At each step the side violated by the largest signed distance is undone.

    Raises:
        CuspEscape: If the reduced point sits beyond the cusp cutoff height
            (above ``cutoff`` or below ``1/cutoff``) or reduction does not
            settle within ``max_steps``.
    """
    x, y = z.x, z.y
    letters: List[Tuple[int, int]] = []
    for _ in range(max_steps):
        worst, worst_value = -1, SIDE_TOL
        for index, side in enumerate(g.sides):
            value = side.outside(x, y)
            if value > worst_value:
                worst, worst_value = index, value
        if worst < 0:
            break
        moved = apply(g.moves[worst], PointH2(x, y))
        x, y = moved.x, moved.y
        letters.extend(g.sides[worst].pairing.inverse().letters)
    else:
        raise CuspEscape(f"reduction of {z} did not settle in {max_steps} steps")
    if y > cutoff or y < 1.0 / cutoff:
        raise CuspEscape(f"{z} reduced to height {y}, beyond the cusp cutoff")
    return PointH2(x, y), Word.of(letters)


def word_of(g: GroupPresentation, m: Moebius) -> Optional[Word]:
    """The word representing an integer matrix, or None if m is not in the group."""
    try:
        _, word = reduce_point(g, apply(m, g.interior))
    except CuspEscape:
        return None
    return word if evaluate(g, word) == m.canonical() else None


def outside_matrix(g: GroupPresentation, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Signed side offsets for many points at once, shape (sides, points)."""
    return np.stack([side.outside(x, y) for side in g.sides])
