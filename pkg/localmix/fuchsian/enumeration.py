"""Orbit balls and closed geodesics of a free Fuchsian group.

Both enumerations are depth-first searches over normal forms whose subtrees
are independent, so the first level of the tree is farmed out with
:func:`localmix.parallel.map_tasks` and merged back in task order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..errors import BudgetExceeded, InvalidPresentation
from ..hyperbolic import ORIGIN, Moebius, PointH2, UnitTangent, length_from_trace
from ..models import EnumerationBudget
from ..parallel import map_tasks
from .presentation import GroupPresentation, evaluate, word_of
from .words import Word, letter_key

_LOGGER = logging.getLogger(__name__)

Matrix = Tuple  # (a, b, c, d), ints or floats, sign not canonical
Syllables = Tuple[Tuple[int, int], ...]

_IDENTITY: Matrix = (1, 0, 0, 1)
# Positive generators of SL2(Z): L = z/(z+1), R = z+1
_L: Matrix = (1, 0, 1, 1)
_R: Matrix = (1, 1, 0, 1)
_MAX_INDEX = 512


class BallElement(NamedTuple):
    word: Word
    matrix: Moebius
    distance: float


@dataclass(frozen=True)
class ConjugacyClass:
    """An oriented hyperbolic conjugacy class, named by its necklace."""

    necklace: Word
    trace: int
    length: float
    primitive: bool

    def abelianize(self, rank: int) -> Tuple[int, ...]:
        return self.necklace.abelianize(rank)

    def sort_key(self) -> tuple:
        return (self.length, len(self.necklace), [letter_key(x) for x in self.necklace])


def _mul(p: Matrix, q: Matrix) -> Matrix:
    return (
        p[0] * q[0] + p[1] * q[2],
        p[0] * q[1] + p[1] * q[3],
        p[2] * q[0] + p[3] * q[2],
        p[2] * q[1] + p[3] * q[3],
    )


def _inv(p: Matrix) -> Matrix:
    return (p[3], -p[1], -p[2], p[0])


def _to_moebius(m: Matrix) -> Moebius:
    if all(isinstance(v, int) for v in m):
        return Moebius.of(*m)
    return Moebius.from_real(*(float(v) for v in m))


def _norm2_from_dist(distance: float) -> float:
    return 2.0 * math.cosh(distance)


def _dist_from_norm2(s) -> float:
    excess = s - 2
    if excess <= 0:
        return 0.0
    return 2.0 * math.asinh(math.sqrt(float(excess) / 4.0))


@dataclass(frozen=True)
class _WalkJob:
    """One subtree of the syllable tree, self-contained for a worker process."""

    letters: Tuple[Matrix, ...]
    rank: int
    left: Optional[Matrix]
    right: Optional[Matrix]
    emit_bound: float
    explore_bound: float
    node_cap: int
    root: Matrix
    root_last: int
    root_syllables: Syllables
    mode: str  # "elements" | "distances" | "classes"
    trace_bound: float = 0.0
    expand: bool = True


def _measure(job: _WalkJob, m: Matrix):
    """2 cosh d(x, m y)."""
    if job.left is not None:
        m = _mul(_mul(job.left, m), job.right)
    return m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]


def _walk(job: _WalkJob):
    """Depth-first search below ``job.root``, including the root itself."""
    elements: List[Tuple[Syllables, Matrix, float]] = []
    distances: List[float] = []
    exponents: List[Tuple[int, ...]] = []
    classes: Dict[Tuple, int] = {}

    def emit(syllables: Syllables, m: Matrix, s) -> None:
        if job.mode == "elements":
            elements.append((syllables, m, _dist_from_norm2(s)))
        elif job.mode == "distances":
            distances.append(_dist_from_norm2(s))
            sums = [0] * job.rank
            for gen, exponent in syllables:
                sums[gen] += exponent
            exponents.append(tuple(sums))
        else:
            tr = abs(m[0] + m[3])
            if 2 < tr <= job.trace_bound and abs(tr - 2) > 1e-9:
                necklace = Word.from_syllables(syllables).necklace()
                if necklace.letters not in classes:
                    classes[necklace.letters] = 1

    s = _measure(job, job.root)
    if s < job.emit_bound:
        emit(job.root_syllables, job.root, s)
    nodes = 1
    stack = [(job.root, job.root_last, job.root_syllables)] if job.expand else []
    while stack:
        m, last, syllables = stack.pop()
        for gen in range(job.rank):
            if gen == last:
                continue
            for sign in (1, -1):
                step = job.letters[2 * gen + (0 if sign > 0 else 1)]
                q, n = m, 0
                while True:
                    q = _mul(q, step)
                    n += 1
                    nodes += 1
                    s = _measure(job, q)
                    if s > job.explore_bound:
                        break
                    child = syllables + ((gen, sign * n),)
                    if s < job.emit_bound:
                        emit(child, q, s)
                    stack.append((q, gen, child))
        if nodes > job.node_cap:
            raise BudgetExceeded(f"ball enumeration passed {job.node_cap} nodes")
    if job.mode == "elements":
        return elements, nodes
    if job.mode == "distances":
        return (
            np.asarray(distances, dtype=np.float64),
            np.asarray(exponents, dtype=np.int64).reshape(-1, job.rank),
        ), nodes
    return list(classes), nodes


def _frame_matrix(z: PointH2) -> Matrix:
    return UnitTangent.from_point_angle(z, math.pi / 2.0).frame.as_tuple()


def _jobs(
    g: GroupPresentation,
    x: PointH2,
    y: PointH2,
    radius: float,
    budget: EnumerationBudget,
    mode: str,
    trace_bound: float = 0.0,
) -> List[_WalkJob]:
    """Split the syllable tree into the identity and one job per first syllable."""
    letters = []
    for m in g.generators:
        letters.append(m.as_tuple())
        letters.append(m.inverse().as_tuple())
    left = right = None
    if not (x == ORIGIN and y == ORIGIN):
        left = _inv(_frame_matrix(x))
        right = _frame_matrix(y)
    root = _WalkJob(
        letters=tuple(letters),
        rank=g.rank,
        left=left,
        right=right,
        emit_bound=_norm2_from_dist(radius),
        explore_bound=_norm2_from_dist(radius + budget.margin),
        node_cap=budget.node_cap,
        root=_IDENTITY,
        root_last=-1,
        root_syllables=(),
        mode=mode,
        trace_bound=trace_bound,
        expand=False,
    )
    jobs = [root]
    for gen in range(g.rank):
        for sign in (1, -1):
            step = letters[2 * gen + (0 if sign > 0 else 1)]
            q, n = _IDENTITY, 0
            while True:
                q = _mul(q, step)
                n += 1
                if _measure(root, q) > root.explore_bound:
                    break
                jobs.append(
                    replace(
                        root,
                        root=q,
                        root_last=gen,
                        root_syllables=((gen, sign * n),),
                        expand=True,
                    )
                )
    return jobs


def estimate_ball_nodes(
    g: GroupPresentation, radius: float, budget: Optional[EnumerationBudget] = None
) -> float:
    """Rough node count of a ball search, without searching.

    The orbit of i grows like pi e^R / area, searched out to R = radius + margin;
    each kept node tries one failing syllable per direction, 2 rank - 1 of them.
    """
    budget = budget or EnumerationBudget()
    if radius <= 0:
        return 1.0
    explored = math.pi * math.exp(radius + budget.margin) / g.area
    return explored * (2 * g.rank - 1)


def _check_radius(radius: float, budget: EnumerationBudget) -> None:
    if radius > budget.t_max:
        raise BudgetExceeded(f"radius {radius} exceeds t_max {budget.t_max}")


def enumerate_ball(
    g: GroupPresentation,
    x: PointH2,
    y: PointH2,
    radius: float,
    budget: Optional[EnumerationBudget] = None,
    threads: int = 1,
) -> Iterator[BallElement]:
    """Every group element with d(x, gamma y) < radius, each exactly once.

    Prefixes are abandoned once 2 cosh d exceeds 2 cosh(radius + margin);
    with x = y = i and integer generators the test is exact integer
    arithmetic on a^2 + b^2 + c^2 + d^2.

    Raises:
        BudgetExceeded: If radius exceeds ``budget.t_max`` or a subtree
            passes ``budget.node_cap`` nodes.
    """
    budget = budget or EnumerationBudget()
    _check_radius(radius, budget)
    if radius <= 0:
        return iter(())
    jobs = _jobs(g, x, y, radius, budget, "elements")
    results = map_tasks(_walk, jobs, threads)
    total = sum(nodes for _, nodes in results)
    _LOGGER.debug("Ball of radius %s: %d nodes, %d subtrees", radius, total, len(jobs))
    return (
        BallElement(Word.from_syllables(syllables), _to_moebius(m), distance)
        for elements, _ in results
        for syllables, m, distance in elements
    )


def ball_distances(
    g: GroupPresentation,
    x: PointH2,
    y: PointH2,
    radius: float,
    budget: Optional[EnumerationBudget] = None,
    threads: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """Distances d(x, gamma y) < radius and exponent-sum rows of the ball's elements.

    Returns a float array of shape (n,) and an int array of shape (n, rank),
    ordered as the subtrees were searched.
    """
    budget = budget or EnumerationBudget()
    _check_radius(radius, budget)
    if radius <= 0:
        return np.zeros(0), np.zeros((0, g.rank), dtype=np.int64)
    jobs = _jobs(g, x, y, radius, budget, "distances")
    results = map_tasks(_walk, jobs, threads)
    total = sum(nodes for _, nodes in results)
    _LOGGER.info("Ball of radius %s searched %d nodes", radius, total)
    distances = np.concatenate([d for (d, _), _ in results])
    exponents = np.concatenate([e.reshape(-1, g.rank) for (_, e), _ in results])
    return distances, exponents


def _make_class(g: GroupPresentation, necklace: Word) -> ConjugacyClass:
    trace = evaluate(g, necklace).trace
    return ConjugacyClass(
        necklace, trace, length_from_trace(trace), not necklace.is_proper_power()
    )


def _classes_by_ball(
    g: GroupPresentation, l_max: float, budget: EnumerationBudget, threads: int
) -> List[ConjugacyClass]:
    # Each closed geodesic passes through the thick part of the polygon, within
    # axis_margin / 2 of i, so some conjugate moves i by at most l + axis_margin.
    radius = l_max + budget.axis_margin
    _check_radius(radius, budget)
    trace_bound = 2.0 * math.cosh(l_max / 2.0) + 1e-9
    jobs = _jobs(g, ORIGIN, ORIGIN, radius, budget, "classes", trace_bound)
    seen: Dict[Tuple, ConjugacyClass] = {}
    for letters, _ in map_tasks(_walk, jobs, threads):
        for key in letters:
            if key not in seen:
                seen[key] = _make_class(g, Word(key))
    return [c for c in seen.values() if c.length <= l_max]


CosetTable = Tuple[List[Matrix], Tuple[int, ...], Tuple[int, ...]]


def _coset_action(g: GroupPresentation) -> Optional[CosetTable]:
    """Right cosets of the group in SL2(Z) and the permutations induced by L and R."""

    def same_coset(h: Matrix, k: Matrix) -> bool:
        return word_of(g, Moebius.of(*_mul(h, _inv(k)))) is not None

    reps: List[Matrix] = [_IDENTITY]
    action = {_L: [], _R: []}
    i = 0
    while i < len(reps):
        for s in (_L, _R):
            h = _mul(reps[i], s)
            target = next((j for j, k in enumerate(reps) if same_coset(h, k)), None)
            if target is None:
                reps.append(h)
                target = len(reps) - 1
                if len(reps) > _MAX_INDEX:
                    return None
            action[s].append(target)
        i += 1
    expected = g.area / (math.pi / 3.0)
    if abs(len(reps) - expected) > 1e-6:
        _LOGGER.warning("Coset count %d does not match index %.3f", len(reps), expected)
        return None
    return reps, tuple(action[_L]), tuple(action[_R])


@dataclass(frozen=True)
class _NecklaceJob:
    """A subtree of positive L/R prenecklaces (L = 0 < R = 1)."""

    group: GroupPresentation
    reps: Tuple[Matrix, ...]
    act_l: Tuple[int, ...]
    act_r: Tuple[int, ...]
    trace_bound: float
    node_cap: int
    root: Matrix
    root_letters: Tuple[int, ...]
    root_period: int
    root_perm: Tuple[int, ...]
    depth_limit: int = -1


def _compose(perm: Tuple[int, ...], act: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(act[i] for i in perm)


def _word_perm(letters: Sequence[int], job: _NecklaceJob) -> Tuple[int, ...]:
    perm = tuple(range(len(job.reps)))
    for letter in letters:
        perm = _compose(perm, job.act_r if letter else job.act_l)
    return perm


def _necklace_classes(
    job: _NecklaceJob,
    letters: Tuple[int, ...],
    m: Matrix,
    period: int,
    perm: Tuple[int, ...],
) -> List[Tuple]:
    """Conjugacy classes of the group inside the SL2(Z) class of a positive necklace.

    They correspond to orbits of the primitive root acting on the cosets the
    necklace fixes.
    """
    fixed = [i for i, j in enumerate(perm) if i == j]
    if not fixed:
        return []
    root_perm = _word_perm(letters[:period], job) if period < len(letters) else perm
    found = []
    remaining = set(fixed)
    for i in fixed:
        if i not in remaining:
            continue
        j = i
        while j in remaining:
            remaining.discard(j)
            j = root_perm[j]
        h = job.reps[i]
        gamma = Moebius.of(*_mul(_mul(h, m), _inv(h)))
        word = word_of(job.group, gamma)
        if word is None:
            raise InvalidPresentation(f"conjugate {gamma} of {letters} left the group")
        found.append(word.necklace().letters)
    return found


def _walk_necklaces(job: _NecklaceJob):
    """Depth-first search over prenecklaces (Fredricksen-Kessler-Maiorana order)."""
    found: List[Tuple] = []
    frontier: List[_NecklaceJob] = []
    nodes = 0
    stack = [(job.root, job.root_letters, job.root_period, job.root_perm)]
    while stack:
        m, letters, period, perm = stack.pop()
        t = len(letters)
        if t and t % period == 0 and 1 in letters and 0 in letters:
            found.extend(_necklace_classes(job, letters, m, period, perm))
        if t == job.depth_limit:
            frontier.append(
                replace(
                    job,
                    root=m,
                    root_letters=letters,
                    root_period=period,
                    root_perm=perm,
                    depth_limit=-1,
                )
            )
            continue
        ref = letters[t - period] if t else 0
        children = [(ref, period)] + [(j, t + 1) for j in range(ref + 1, 2) if t]
        for letter, child_period in children:
            q = _mul(m, _R if letter else _L)
            nodes += 1
            if q[0] + q[3] > job.trace_bound:
                continue
            child = letters + (letter,)
            if 1 not in child:
                # an R must still come, and appending it can only raise the trace
                q_r = _mul(q, _R)
                if q_r[0] + q_r[3] > job.trace_bound:
                    continue
            act = job.act_r if letter else job.act_l
            stack.append((q, child, child_period, _compose(perm, act)))
        if nodes > job.node_cap:
            raise BudgetExceeded(f"necklace enumeration passed {job.node_cap} nodes")
    return found, frontier, nodes


def _classes_by_necklaces(
    g: GroupPresentation, l_max: float, budget: EnumerationBudget, threads: int
) -> Optional[List[ConjugacyClass]]:
    table = _coset_action(g)
    if table is None:
        return None
    reps, act_l, act_r = table
    trace_bound = 2.0 * math.cosh(l_max / 2.0) + 1e-9
    _LOGGER.debug(
        "Arithmetic enumeration over %d cosets, trace <= %.1f", len(reps), trace_bound
    )
    head = _NecklaceJob(
        group=g,
        reps=tuple(reps),
        act_l=act_l,
        act_r=act_r,
        trace_bound=trace_bound,
        node_cap=budget.node_cap,
        root=_IDENTITY,
        root_letters=(),
        root_period=1,
        root_perm=tuple(range(len(reps))),
        depth_limit=8 if threads > 1 else -1,
    )
    found, frontier, nodes = _walk_necklaces(head)
    for sub_found, _, sub_nodes in map_tasks(_walk_necklaces, frontier, threads):
        found.extend(sub_found)
        nodes += sub_nodes
    _LOGGER.debug("Necklace search visited %d nodes", nodes)
    seen: Dict[Tuple, ConjugacyClass] = {}
    for key in found:
        if key not in seen:
            seen[key] = _make_class(g, Word(key))
    return [c for c in seen.values() if c.length <= l_max]


def enumerate_conjugacy_classes(
    g: GroupPresentation,
    l_max: float,
    budget: Optional[EnumerationBudget] = None,
    threads: int = 1,
    method: str = "auto",
) -> List[ConjugacyClass]:
    """Oriented hyperbolic conjugacy classes with translation length <= l_max.

    ``method`` is ``"ball"`` (search the orbit ball of radius
    l_max + axis_margin), ``"arithmetic"`` (groups inside SL2(Z): walk the
    positive L/R necklaces of SL2(Z) and split each class over the cosets it
    fixes) or ``"auto"``, which prefers the arithmetic search when it applies.
    Classes come back sorted by length, then necklace.

    Raises:
        BudgetExceeded: If l_max exceeds ``budget.t_max`` or the node cap is hit.
    """
    budget = budget or EnumerationBudget()
    _check_radius(l_max, budget)
    if l_max <= 0:
        return []
    classes = None
    if method in ("auto", "arithmetic") and g.is_arithmetic:
        classes = _classes_by_necklaces(g, l_max, budget, threads)
    if classes is None:
        if method == "arithmetic":
            raise ValueError(f"{g.name} is not a finite-index subgroup of SL2(Z)")
        classes = _classes_by_ball(g, l_max, budget, threads)
    classes.sort(key=ConjugacyClass.sort_key)
    _LOGGER.info("%d oriented classes with length <= %s", len(classes), l_max)
    return classes
