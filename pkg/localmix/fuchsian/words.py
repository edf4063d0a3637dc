"""Freely reduced words in a free group on k generators."""
from __future__ import annotations

import re
import string
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Sequence, Tuple

Letter = Tuple[int, int]

_TOKEN = re.compile(r"([A-Za-z])(?:\^(-?\d+))?")


def _reduce(letters: Iterable[Letter]) -> Tuple[Letter, ...]:
    stack: List[Letter] = []
    for gen, sign in letters:
        if sign not in (1, -1) or gen < 0:
            raise ValueError(f"bad letter {(gen, sign)}")
        if stack and stack[-1][0] == gen and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((gen, sign))
    return tuple(stack)


def letter_key(letter: Letter) -> int:
    """Total order a < A < b < B < ... used for necklace canonical forms."""
    gen, sign = letter
    return 2 * gen + (0 if sign > 0 else 1)


@dataclass(frozen=True)
class Word:
    """A freely reduced word, stored as (generator index, +-1) letters.

    Construct through :meth:`of`, :meth:`parse` or :meth:`from_syllables`; the
    raw constructor does not reduce.
    """

    letters: Tuple[Letter, ...] = ()

    @classmethod
    def of(cls, letters: Iterable[Letter]) -> "Word":
        return cls(_reduce(letters))

    @classmethod
    def identity(cls) -> "Word":
        return cls(())

    @classmethod
    def generator(cls, index: int, sign: int = 1) -> "Word":
        return cls.of([(index, sign)])

    @classmethod
    def from_syllables(cls, syllables: Iterable[Tuple[int, int]]) -> "Word":
        """Expand (generator, exponent) syllables."""
        letters: List[Letter] = []
        for gen, exponent in syllables:
            sign = 1 if exponent > 0 else -1
            letters.extend([(gen, sign)] * abs(exponent))
        return cls.of(letters)

    @classmethod
    def from_signed(cls, indices: Sequence[int]) -> "Word":
        """From the JSON encoding: 1-based signed generator indices, e.g. [1, -2]."""
        if any(i == 0 for i in indices):
            raise ValueError("generator indices are 1-based; 0 is not allowed")
        return cls.of((abs(i) - 1, 1 if i > 0 else -1) for i in indices)

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse ``"abA"``, ``"a b^-1"`` or ``"a^3 B"``; upper case is the inverse.

        The empty string and ``"1"`` denote the identity.
        """
        text = text.replace(" ", "").replace("*", "")
        if text in ("", "1", "e"):
            return cls.identity()
        letters: List[Letter] = []
        pos = 0
        for match in _TOKEN.finditer(text):
            if match.start() != pos:
                raise ValueError(f"cannot parse word {text!r}")
            pos = match.end()
            char, power = match.group(1), int(match.group(2) or 1)
            gen = string.ascii_lowercase.index(char.lower())
            sign = 1 if char.islower() else -1
            if power < 0:
                sign, power = -sign, -power
            letters.extend([(gen, sign)] * power)
        if pos != len(text):
            raise ValueError(f"cannot parse word {text!r}")
        return cls.of(letters)

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return "".join(
            string.ascii_lowercase[g] if s > 0 else string.ascii_uppercase[g]
            for g, s in self.letters
        )

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word.of(self.letters + other.letters)

    def __invert__(self) -> "Word":
        return self.inverse()

    def inverse(self) -> "Word":
        return Word(tuple((g, -s) for g, s in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return Word.of(base.letters * abs(n))

    def to_signed(self) -> List[int]:
        return [(g + 1) * s for g, s in self.letters]

    def syllables(self) -> List[Tuple[int, int]]:
        """Maximal runs g^n, n != 0, consecutive generators distinct."""
        out: List[Tuple[int, int]] = []
        for gen, sign in self.letters:
            if out and out[-1][0] == gen:
                out[-1] = (gen, out[-1][1] + sign)
            else:
                out.append((gen, sign))
        return out

    def abelianize(self, rank: int) -> Tuple[int, ...]:
        """Exponent-sum vector in Z^rank."""
        sums = [0] * rank
        for gen, sign in self.letters:
            if gen >= rank:
                raise ValueError(f"letter {gen} outside rank {rank}")
            sums[gen] += sign
        return tuple(sums)

    def cyclically_reduced(self) -> "Word":
        letters = self.letters
        lo, hi = 0, len(letters)
        while hi - lo >= 2 and letters[lo] == (letters[hi - 1][0], -letters[hi - 1][1]):
            lo += 1
            hi -= 1
        return Word(letters[lo:hi])

    def necklace(self) -> "Word":
        """Least rotation of the cyclic reduction under :func:`letter_key`."""
        cyc = self.cyclically_reduced().letters
        if not cyc:
            return Word.identity()
        keys = [letter_key(x) for x in cyc]
        start = _least_rotation(keys)
        return Word(cyc[start:] + cyc[:start])

    def primitive_period(self) -> int:
        """Smallest p such that the cyclic word is a power of its first p letters."""
        cyc = self.cyclically_reduced().letters
        n = len(cyc)
        for p in range(1, n + 1):
            if n % p == 0 and cyc == cyc[:p] * (n // p):
                return p
        return n

    def is_proper_power(self) -> bool:
        cyc = self.cyclically_reduced()
        return len(cyc) > 0 and self.primitive_period() < len(cyc)


def abelianize(w: Word, rank: int) -> Tuple[int, ...]:
    return w.abelianize(rank)


def _least_rotation(keys: Sequence[int]) -> int:
    n = len(keys)
    doubled = list(keys) * 2
    return min(range(n), key=lambda s: doubled[s:s + n])
