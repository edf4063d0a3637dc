"""Built-in presentations."""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Dict

from ..errors import ConfigError
from ..hyperbolic import ORIGIN, Moebius
from .presentation import GroupPresentation, Side
from .words import Word


def gamma2() -> GroupPresentation:
    """Principal congruence subgroup of level 2: genus 0, cusps at infinity, 0 and 1.

    The polygon is |Re z| <= 1 outside the circles |z + 1/2| = 1/2 and
    |z - 1/2| = 1/2.
    """
    a, b = Word.parse("a"), Word.parse("b")
    return GroupPresentation.build(
        name="gamma2",
        generators=[Moebius.of(1, 2, 0, 1), Moebius.of(1, 0, 2, 1)],
        cusp_words=[a, b.inverse(), b * a.inverse()],
        genus=0,
        sides=[
            Side(-1.0, None, a),
            Side(1.0, None, a.inverse()),
            Side(-1.0, 0.0, b),
            Side(0.0, 1.0, b.inverse()),
        ],
        interior=ORIGIN,
    )


def punctured_torus() -> GroupPresentation:
    """Commutator subgroup of the modular group: genus 1, one cusp.

    The polygon is the ideal quadrilateral with vertices infinity, -1, 0, 1.
    """
    a, b = Word.parse("a"), Word.parse("b")
    return GroupPresentation.build(
        name="punctured_torus",
        generators=[Moebius.of(1, 1, 1, 2), Moebius.of(1, -1, -1, 2)],
        cusp_words=[Word.parse("abAB")],
        genus=1,
        sides=[
            Side(-1.0, None, a),
            Side(1.0, None, b),
            Side(0.0, 1.0, a.inverse()),
            Side(-1.0, 0.0, b.inverse()),
        ],
        interior=ORIGIN,
    )


PRESETS: Dict[str, Callable[[], GroupPresentation]] = {
    "gamma2": gamma2,
    "punctured_torus": punctured_torus,
}


@lru_cache(maxsize=None)
def preset(name: str) -> GroupPresentation:
    """Look up a built-in presentation by name.

    Raises:
        ConfigError: If the name is unknown.
    """
    try:
        factory = PRESETS[name]
    except KeyError as err:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}"
        ) from err
    return factory()
