"""Free Fuchsian groups: words, presentations, reduction and enumeration."""
from .enumeration import (
    BallElement,
    ConjugacyClass,
    ball_distances,
    enumerate_ball,
    enumerate_conjugacy_classes,
    estimate_ball_nodes,
)
from .presentation import (
    GroupPresentation,
    Side,
    evaluate,
    generates_free_group,
    reduce_point,
    word_of,
)
from .presets import PRESETS, preset
from .words import Word, abelianize

__all__ = [
    "BallElement",
    "ConjugacyClass",
    "GroupPresentation",
    "PRESETS",
    "Side",
    "Word",
    "abelianize",
    "ball_distances",
    "enumerate_ball",
    "enumerate_conjugacy_classes",
    "estimate_ball_nodes",
    "evaluate",
    "generates_free_group",
    "preset",
    "reduce_point",
    "word_of",
]
