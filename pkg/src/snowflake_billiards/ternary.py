"""Base-3 expansions over {l, c, r} and the classification of basepoints."""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import NamedTuple, Optional

from .errors import BudgetError, DomainError
from .lattice import RationalLike, as_rational

DIGITS = "lcr"
_VALUE = {"l": 0, "c": 1, "r": 2}
_TO012 = str.maketrans("lcr", "012")

MIDPOINT_SET_BUDGET = 12


class TernaryExpansion:
    """``0.prefix cycle cycle ...`` in base 3, digits written l, c, r.

    Terminating expansions carry the cycle ``"l"``; their other form (ending
    in ``r`` forever) is available as :attr:`alternate`.

    The cycle may be given as a string or, for long periods, as the exact
    value ``tail`` of ``0.(cycle)`` together with its length; the string is
    then produced only when something asks for it.
    """

    def __init__(
        self,
        prefix: str,
        cycle: Optional[str] = None,
        *,
        tail: Optional[Fraction] = None,
        period: Optional[int] = None,
    ):
        if set(prefix) - set(DIGITS):
            raise DomainError(f"bad digits in prefix {prefix!r}")
        if cycle is not None:
            if not cycle or set(cycle) - set(DIGITS):
                raise DomainError(f"bad cycle {cycle!r}")
        elif tail is None or period is None or not 0 <= tail < 1 or period < 1:
            raise DomainError("need a cycle string, or a tail in [0, 1) and a period")
        self.prefix = prefix
        self._cycle = cycle
        self._tail = tail
        self._period = period

    @property
    def cycle(self) -> str:
        if self._cycle is None:
            num, den = self._tail.numerator, self._tail.denominator
            out = []
            for _ in range(self._period):
                num *= 3
                d, num = divmod(num, den)
                out.append(DIGITS[d])
            self._cycle = "".join(out)
        return self._cycle

    @property
    def period(self) -> int:
        return len(self._cycle) if self._cycle is not None else self._period

    @property
    def tail(self) -> Fraction:
        """Value of ``0.(cycle)``."""
        if self._tail is None:
            self._tail = expansion_value("", self._cycle)
        return self._tail

    @property
    def terminating(self) -> bool:
        return self.period == 1 and self.tail == 0

    @property
    def value(self) -> Fraction:
        head = int(self.prefix.translate(_TO012), 3) if self.prefix else 0
        return (head + self.tail) / 3 ** len(self.prefix)

    @property
    def alternate(self) -> Optional["TernaryExpansion"]:
        """The 0/2-tail form of a terminating expansion, if there is one."""
        if not self.terminating or not self.prefix:
            return None
        last = self.prefix[-1]
        return TernaryExpansion(self.prefix[:-1] + DIGITS[_VALUE[last] - 1], "r")

    def digit(self, i: int) -> str:
        """The i-th digit after the point, 1-based."""
        if i < 1:
            raise DomainError("digits are indexed from 1")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        j = (i - len(self.prefix) - 1) % self.period
        if self._cycle is not None:
            return self._cycle[j]
        t = self._tail
        r = t.numerator * pow(3, j, t.denominator) % t.denominator
        return DIGITS[3 * r // t.denominator]

    def digits(self, n: int) -> str:
        return "".join(self.digit(i) for i in range(1, n + 1))

    def shift(self, k: int = 1) -> "TernaryExpansion":
        """Drop the first ``k`` digits (multiply by 3**k modulo 1)."""
        if k <= len(self.prefix):
            return TernaryExpansion(self.prefix[k:], self._cycle, tail=self._tail, period=self._period)
        r = (k - len(self.prefix)) % self.period
        if self._cycle is not None:
            return TernaryExpansion("", self._cycle[r:] + self._cycle[:r])
        t = self._tail
        return TernaryExpansion(
            "", tail=Fraction(t.numerator * pow(3, r, t.denominator) % t.denominator, t.denominator), period=self.period
        )

    def as_digits(self) -> dict:
        return {"prefix": self.prefix.translate(_TO012), "cycle": self.cycle.translate(_TO012)}

    def _key(self) -> tuple:
        return (self.prefix, self.tail, self.period)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TernaryExpansion):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"TernaryExpansion({self.prefix!r}, {self.cycle!r})"

    def __str__(self) -> str:
        return f"0.{self.prefix}({self.cycle})"


def expansion_value(prefix: str, cycle: str) -> Fraction:
    head = Fraction(0)
    for i, ch in enumerate(prefix, start=1):
        head += Fraction(_VALUE[ch], 3**i)
    period = Fraction(0)
    for i, ch in enumerate(cycle, start=1):
        period += Fraction(_VALUE[ch], 3**i)
    tail = period / (1 - Fraction(1, 3 ** len(cycle)))
    return head + tail / 3 ** len(prefix)


def _prime_factors(m: int) -> list[int]:
    out, f = [], 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1 if f == 2 else 2
    if m > 1:
        out.append(m)
    return out


def _order_of_3(q: int) -> int:
    """Multiplicative order of 3 modulo q, for q coprime to 3."""
    if q == 1:
        return 1
    phi = q
    for f in _prime_factors(q):
        phi = phi // f * (f - 1)
    order = phi
    for f in _prime_factors(phi):
        while order % f == 0 and pow(3, order // f, q) == 1:
            order //= f
    return order


def _base3(m: int, width: int) -> str:
    out = []
    for _ in range(width):
        m, d = divmod(m, 3)
        out.append(DIGITS[d])
    return "".join(reversed(out))


def expand(x: RationalLike) -> TernaryExpansion:
    """Canonical expansion: the preperiod is the power of 3 in the denominator
    and the period is the order of 3 modulo the rest."""
    x = as_rational(x)
    if not 0 <= x <= 1:
        raise DomainError(f"{x} is outside [0, 1]")
    if x == 1:
        return TernaryExpansion("", "r")
    q, k = x.denominator, 0
    while q % 3 == 0:
        q //= 3
        k += 1
    # x * 3^k = head + rem / q with head < 3^k
    head, rem = divmod(x.numerator, q)
    prefix = _base3(head, k)
    if q == 1:
        return TernaryExpansion(prefix, "l")
    return TernaryExpansion(prefix, tail=Fraction(rem, q), period=_order_of_3(q))


def omega(x: RationalLike, n: int) -> int:
    """Number of c digits among the first n digits of x."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    return expand(x).digits(n).count("c")


def omega_table(x: RationalLike, n: int) -> list[int]:
    e = expand(x)
    out, count = [], 0
    for i in range(1, n + 1):
        count += e.digit(i) == "c"
        out.append(count)
    return out


class OrbitKind(enum.Enum):
    SINGULAR_TERNARY = "SingularTernary"
    PIECEWISE_FAGNANO = "PiecewiseFagnano"
    STABILIZING = "Stabilizing"
    GENERALIZED_PF = "GeneralizedPF"


class OrbitClass(NamedTuple):
    kind: OrbitKind
    N: Optional[int] = None  # prefix length (pF) or position of the last c (stabilizing)

    def __str__(self) -> str:
        return self.kind.value if self.N is None else f"{self.kind.value}(N={self.N})"


def classify(x: RationalLike) -> OrbitClass:
    x = as_rational(x)
    if not 0 < x < 1:
        raise DomainError(f"{x} is outside (0, 1)")
    e = expand(x)
    if e.terminating:
        return OrbitClass(OrbitKind.SINGULAR_TERNARY)
    if e.tail == Fraction(1, 2):  # 0.(c)
        return OrbitClass(OrbitKind.PIECEWISE_FAGNANO, len(e.prefix))
    if "c" not in e.cycle:
        return OrbitClass(OrbitKind.STABILIZING, e.prefix.rfind("c") + 1)
    return OrbitClass(OrbitKind.GENERALIZED_PF)


def midpoint_set(n: int, budget: int = MIDPOINT_SET_BUDGET) -> set[Fraction]:
    """M(n): the image of {1/2} under n rounds of x -> {x/3, x/3 + 1/3, x/3 + 2/3}."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n > budget:
        raise BudgetError(f"midpoint_set({n}) exceeds the budget n <= {budget}")
    current = {Fraction(1, 2)}
    for _ in range(n):
        current = {y / 3 + Fraction(j, 3) for y in current for j in range(3)}
    return current


class MidpointRepresentation(NamedTuple):
    N: int
    p: tuple[int, ...]  # p_1 .. p_N; p_i is weighted by 3**-(N - i + 1)

    def value(self) -> Fraction:
        N = self.N
        return sum((Fraction(pi, 3 ** (N - i + 1)) for i, pi in enumerate(self.p, start=1)), Fraction(0)) + Fraction(
            1, 2 * 3**N
        )


def mc_representation(x: RationalLike, length: Optional[int] = None) -> Optional[MidpointRepresentation]:
    """The (N, p) with x = sum p_i / 3^(N-i+1) + 1/(2*3^N), when x is a ternary midpoint.

    N is minimal unless ``length`` asks for a longer form, which pads with
    the digit 1 (1/2 is fixed by the middle map).
    """
    x = as_rational(x)
    if not 0 < x < 1:
        return None
    e = expand(x)
    if e.tail != Fraction(1, 2):
        return None
    digits = e.prefix
    if length is not None:
        if length < len(digits):
            raise DomainError(f"{x} needs at least {len(digits)} digits")
        digits += "c" * (length - len(digits))
    # the last applied map contributes the first digit, so the order is reversed
    return MidpointRepresentation(len(digits), tuple(_VALUE[ch] for ch in reversed(digits)))


def is_cantor(x: RationalLike) -> bool:
    e = expand(x)
    if "c" not in e.prefix and "c" not in e.cycle:
        return True
    alt = e.alternate
    return alt is not None and "c" not in alt.prefix


def is_cantor_nonternary(x: RationalLike) -> bool:
    e = expand(x)
    return not e.terminating and e.cycle != "r" and "c" not in e.prefix + e.cycle
