"""Side addresses over the alphabet {0,...,5}.

A word of length ``n + 1`` names a side of the level-``n`` prefractal.  The
three sides of the triangle are ``5`` (the base), ``1`` and ``3`` in
counterclockwise order.  Each side of level ``n`` spawns four children at
level ``n + 1``: its two surviving thirds and the two sides of the bump
glued over its middle third.  The bump sides always get ``1`` then ``3``;
the digits of the thirds depend on the *key* of the parent, which is the
last ``1`` or ``3`` in the word (the base counts as key ``1``).
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .errors import DomainError

ALPHABET = frozenset("012345")
ROOTS = ("5", "1", "3")
BUMP_SYMBOLS = frozenset("13")
THIRD_SYMBOLS = frozenset("024")

# key -> (start third, end third)
_THIRDS = {"1": ("4", "2"), "3": ("2", "0")}


class ChildDigits(NamedTuple):
    start_third: str
    bump_first: str
    bump_second: str
    end_third: str


def key(word: str) -> str:
    for ch in reversed(word):
        if ch in BUMP_SYMBOLS:
            return ch
    return "1"


def is_side_address(word: str) -> bool:
    if not word or word[0] not in ROOTS:
        return False
    for i in range(1, len(word)):
        if word[i] not in child_digits(word[:i], validate=False):
            return False
    return True


def child_digits(parent: str, validate: bool = True) -> ChildDigits:
    """Digits appended to ``parent`` for its children, in boundary order."""
    if validate and not is_side_address(parent):
        raise DomainError(f"not a side address: {parent!r}")
    start, end = _THIRDS[key(parent)]
    return ChildDigits(start, "1", "3", end)


def children(parent: str) -> tuple[str, str, str, str]:
    return tuple(parent + d for d in child_digits(parent))


def truncate(word: str, m: int) -> str:
    if not 0 <= m <= len(word):
        raise DomainError(f"cannot truncate a word of length {len(word)} to {m}")
    return word[:m]


def is_bump(word: str) -> bool:
    """True when the side is not part of any side of the previous level."""
    return len(word) > 1 and word[-1] in BUMP_SYMBOLS


def straighten(word: str) -> str:
    """Force the 1/3 subsequence to alternate, swapping 0 and 4 after each flip.

    Every 1 or 3 that has to change value to keep the alternation is
    rewritten, and in the run of 0/2/4 symbols that follows it each 0 becomes
    4 and each 4 becomes 0.  Symbols before the first 1 or 3 are untouched.
    """
    if set(word) - ALPHABET:
        raise DomainError(f"word contains symbols outside 0-5: {word!r}")
    out = []
    expected = None
    swapping = False
    for ch in word:
        if ch in BUMP_SYMBOLS:
            if expected is None:
                expected = ch
            swapping = ch != expected
            out.append(expected)
            expected = "3" if expected == "1" else "1"
        elif swapping and ch in "04":
            out.append("4" if ch == "0" else "0")
        else:
            out.append(ch)
    return "".join(out)


def refine_position(word: str, position, levels: int):
    """Push a point given as (side address, relative position) down ``levels`` levels.

    Returns the address and position of the same point on the descendant
    side, or ``None`` if the point falls in a removed middle third on the way.
    A point exactly on a third boundary is a corner and is returned as an
    endpoint of the adjacent third.
    """
    for _ in range(levels):
        digits = child_digits(word, validate=False)
        if position <= Fraction(1, 3):
            word, position = word + digits.start_third, position * 3
        elif position >= Fraction(2, 3):
            word, position = word + digits.end_third, position * 3 - 2
        else:
            return None
    return word, position

