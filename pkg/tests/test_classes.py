from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bernstein_sl2.classes import (
    CompactPart,
    ConvergenceError,
    Depth,
    QPower,
    RegSSClass,
    TorusType,
    class_grid,
    compact_partition,
    depths_upto,
    in_utop_domain,
    lie_class_of,
    norm_alpha_diff,
    parse_class,
    square_class_of,
    utop_threshold,
    valuation,
)

half = Fraction(1, 2)


@st.composite
def classes(draw):
    kind = draw(st.sampled_from(["top", "sr", "nc"]))
    residue = draw(st.one_of(st.none(), st.integers(1, 50)))
    if kind == "nc":
        return RegSSClass.non_compact(draw(st.integers(1, 9)))
    if kind == "sr":
        return RegSSClass.strongly_regular(draw(st.sampled_from(["split", "unram"])), residue)
    torus = draw(st.sampled_from(["split", "unram", "ram"]))
    m = draw(st.integers(1, 12)) - (half if torus == "ram" else 0)
    return RegSSClass.top(torus, m, draw(st.sampled_from([1, -1])), residue)


@given(classes())
def test_canonical_roundtrip(c):
    assert parse_class(c.canonical()) == c


@pytest.mark.parametrize("text", ["split:+1:m=3/2", "ram:+1:m=1", "ram:sr", "split:+2:m=1", "unram:nc:v=1", "foo"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_class(text)


def test_partition():
    assert compact_partition(RegSSClass.top("split", 1)) is CompactPart.TOP_UNIPOTENT
    assert compact_partition(RegSSClass.top("split", 1, -1)) is CompactPart.MINUS_TOP_UNIPOTENT
    assert compact_partition(RegSSClass.strongly_regular("unram")) is CompactPart.STRONGLY_REGULAR
    assert compact_partition(RegSSClass.non_compact(2)) is CompactPart.NON_COMPACT


def test_norms():
    assert norm_alpha_diff(RegSSClass.top("split", 2), 3) == QPower(3, Fraction(1, 9), 0)
    r = norm_alpha_diff(RegSSClass.top("ram", half), 3)
    assert not r.is_rational()
    assert r * r == QPower(3, Fraction(1, 3), 0)
    assert str(r) == "3^(-1/2)"
    assert norm_alpha_diff(RegSSClass.strongly_regular("unram"), 3).to_fraction() == 1
    with pytest.raises(ValueError):
        norm_alpha_diff(RegSSClass.non_compact(1), 3)


def test_utop_domain_examples():
    top = RegSSClass.top
    assert in_utop_domain(top("split", 1), 0)
    assert not in_utop_domain(RegSSClass.strongly_regular("split", 2), 0)
    assert not in_utop_domain(top("ram", half), half)
    assert in_utop_domain(top("ram", 3 * half), half)
    assert not in_utop_domain(top("unram", 1), 1)
    assert in_utop_domain(top("unram", 2), 1)
    assert not in_utop_domain(top("split", 5, -1), 0)


def test_utop_domain_shrinks_with_depth():
    grid = class_grid(5, 4)
    depths = depths_upto(4)
    for c in grid:
        inside = [in_utop_domain(c, d) for d in depths]
        # once outside, outside for every larger depth
        assert inside == sorted(inside, reverse=True)


def test_thresholds():
    assert utop_threshold(TorusType.SPLIT, Depth.of(half)) == 1
    assert utop_threshold(TorusType.SPLIT, Depth.of(1)) == 2
    assert utop_threshold(TorusType.RAMIFIED, Depth.of(half)) == 3 * half
    assert utop_threshold(TorusType.RAMIFIED, Depth.of(1)) == 3 * half
    assert utop_threshold(TorusType.RAMIFIED, Depth.of(0)) == half


def test_lie_class_of():
    assert lie_class_of(2, "square-unit", 5).canonical() == "split:+1:m=1"
    assert lie_class_of(2, "nonsquare-unit", 5).canonical() == "unram:+1:m=1"
    assert lie_class_of(3, "odd-valuation", 5).canonical() == "ram:+1:m=3/2"
    with pytest.raises(ConvergenceError):
        lie_class_of(0, "square-unit", 5)
    with pytest.raises(ConvergenceError):
        lie_class_of(1, "odd-valuation", 3)  # m = 1/2 = 1/(p-1)
    assert lie_class_of(1, "odd-valuation", 5).m == half
    with pytest.raises(ValueError):
        lie_class_of(3, "square-unit", 5)


def test_valuations():
    assert valuation(Fraction(18, 5), 3) == 2
    assert valuation(Fraction(2, 27), 3) == -3
    assert square_class_of(Fraction(-25), 5) == (2, "square-unit")  # -1 is a square mod 5
    assert square_class_of(Fraction(50), 5) == (2, "nonsquare-unit")
    assert square_class_of(Fraction(5), 5) == (1, "odd-valuation")
    with pytest.raises(ValueError):
        valuation(Fraction(0), 3)


def test_depth():
    assert Depth.of("3/2") == Depth(3)
    assert str(Depth.of(2)) == "2"
    assert [str(d) for d in depths_upto(1)] == ["0", "1/2", "1"]
    with pytest.raises(ValueError):
        Depth.of(Fraction(1, 3))
    with pytest.raises(ValueError):
        Depth(-1)


def test_class_validation():
    with pytest.raises(ValueError):
        RegSSClass.top("ram", 1)
    with pytest.raises(ValueError):
        RegSSClass.top("split", half)
    with pytest.raises(ValueError):
        RegSSClass.strongly_regular("ram")
    with pytest.raises(ValueError):
        RegSSClass.non_compact(0)


def test_grid_is_sorted_and_complete():
    grid = class_grid(3, 1)
    names = [c.canonical() for c in grid]
    assert len(names) == len(set(names))
    assert "split:+1:m=4" in names and "ram:-1:m=7/2" in names
    assert "split:nc:v=1" in names
    assert grid == sorted(grid, key=RegSSClass.sort_key)
