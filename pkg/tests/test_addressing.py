import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from snowflake_billiards.addressing import (
    child_digits,
    children,
    is_bump,
    is_side_address,
    key,
    refine_position,
    straighten,
    truncate,
)
from snowflake_billiards.boundary import build_prefractal
from snowflake_billiards.dynamics import compatible_basepoint
from snowflake_billiards.errors import CornerCompatible, DomainError

words = st.text(alphabet="012345", max_size=40)


def test_child_digits():
    assert children("51") == ("514", "511", "513", "512")
    assert children("13") == ("132", "131", "133", "130")
    assert "51" in children("5")
    assert tuple(child_digits("3")) == ("2", "1", "3", "0")
    with pytest.raises(DomainError):
        child_digits("55")


def test_key_inheritance():
    assert key("5") == "1"
    assert key("5124") == "1"
    assert key("5132") == "3"


def test_truncate():
    assert truncate("513", 2) == "51"
    assert truncate("51", 1) == "5"
    assert truncate("513", 3) == "513"
    with pytest.raises(DomainError):
        truncate("51", 3)


def test_straighten_examples():
    assert straighten("13123232113133100324") == "13123212313131344120"
    assert straighten("13") == "13"
    assert straighten("11") == "13"
    assert straighten("0424") == "0424"
    with pytest.raises(DomainError):
        straighten("16")


def test_straighten_random_words():
    rng = random.Random(4)
    for _ in range(10_000):
        w = "".join(rng.choice("012345") for _ in range(rng.randint(0, 40)))
        s = straighten(w)
        assert straighten(s) == s
        assert len(s) == len(w)
        assert all(a == b for a, b in zip(w, s) if a in "25")


@given(words)
def test_straighten_alternates(w):
    bumps = [c for c in straighten(w) if c in "13"]
    assert all(a != b for a, b in zip(bumps, bumps[1:]))


@pytest.mark.parametrize("n", range(7))
def test_addresses_bijective_and_grammatical(n):
    p = build_prefractal(n)
    words_ = [s.address for s in p.sides]
    assert len(set(words_)) == len(words_)
    for w in words_:
        assert len(w) == n + 1
        assert "5" not in w[1:] and is_side_address(w)


@pytest.mark.parametrize("n", range(1, 7))
def test_truncation_compatibility(n):
    p, parent = build_prefractal(n), build_prefractal(n - 1)
    for s in p.sides:
        up = parent.side_by_address(truncate(s.address, n))
        if is_bump(s.address):
            # the bump sits over the middle third of its parent
            g = parent.ghosts[up.index - 1].segment
            assert s.segment.start in (g.start, g.end) or s.segment.end in (g.start, g.end)
        else:
            assert up.segment.contains(s.segment.start) and up.segment.contains(s.segment.end)


@pytest.mark.parametrize("n", range(5))
def test_compatible_rays_reach_straight_sides(n):
    p = build_prefractal(n)
    N = 2 * 3 ** (n + 3)
    for k in range(1, N, 2):
        try:
            st_ = compatible_basepoint(Fraction(k, N), p)
        except CornerCompatible:
            continue
        w = st_.side.address
        assert straighten(w) == w


def test_refine_position():
    assert refine_position("5", Fraction(1, 4), 2) == ("542", Fraction(1, 4))
    assert refine_position("5", Fraction(1, 2), 1) is None
    assert refine_position("51", Fraction(3, 4), 3) == ("51242", Fraction(1, 4))
