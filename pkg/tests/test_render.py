import numpy as np
import pytest

from qlocc.fixtures import build_fixture
from qlocc.render import extract_tiles, overlay_from_kraus, render
from qlocc.states import PartySpace, StateSet, make_ket


def test_s1_tiles_partition_grid():
    diagram = extract_tiles(build_fixture("s1"))
    assert len(diagram.tiles) == 10
    cover = np.zeros((4, 4), dtype=int)
    for t in diagram.tiles:
        for a, b in t.cells():
            cover[a, b] += 1
    assert (cover == 1).all()
    kinds = sorted(t.kind for t in diagram.tiles)
    assert kinds.count("square") == 4
    assert kinds.count("domino") == 6


def test_tiles33_stopper_is_larger_tile():
    diagram = extract_tiles(build_fixture("tiles33"))
    stopper = [t for t in diagram.tiles if "stopper" in t.members]
    assert len(stopper) == 1
    assert stopper[0].kind == "larger"
    assert (stopper[0].a_lo, stopper[0].a_hi, stopper[0].b_lo, stopper[0].b_hi) == (0, 2, 0, 2)


def test_s5_strict_refusal_names_state():
    with pytest.raises(ValueError) as ei:
        extract_tiles(build_fixture("s5"))
    assert "W0_0123" in str(ei.value)


def test_s5_linked_mode():
    diagram = extract_tiles(build_fixture("s5"), allow_linked=True)
    linked = dict(diagram.links)
    assert "W0_0123+" in linked
    assert len(linked["W0_0123+"]) == 2


def test_non_contiguous_refused_strict():
    s = PartySpace((4, 4))
    gap = StateSet(s, [make_ket(s, [(1, (0, 0)), (1, (0, 2))], "gap")], "g")
    with pytest.raises(ValueError):
        extract_tiles(gap)  # two rectangles: refused without linked mode
    assert len(extract_tiles(gap, allow_linked=True).tiles) == 2


def test_unfillable_rectangle_refused():
    s = PartySpace((2, 2))
    bell = StateSet(s, [make_ket(s, [(1, (0, 0)), (1, (1, 1))], "bell")], "b")
    with pytest.raises(ValueError):
        extract_tiles(bell, allow_linked=True)


def test_render_ascii_deterministic():
    s1 = build_fixture("s1")
    a = render(s1, "ascii")
    b = render(s1, "ascii")
    assert a == b
    assert "10 tiles" in a
    assert "T0" in a


def test_render_ascii_single_state_full_tile():
    s = PartySpace((3, 3))
    one = StateSet(s, [make_ket(s, [(1, (a, b)) for a in range(3) for b in range(3)], "full")], "one")
    out = render(one, "ascii")
    assert "1 tiles" in out


def test_render_svg_overlay():
    s3 = build_fixture("s3")
    svg = render(s3, "svg", overlay=(1, [0, 1, 2]))
    assert svg.startswith("<svg")
    assert 'class="overlay"' in svg
    assert svg == render(s3, "svg", overlay=(1, [0, 1, 2]))


def test_render_s5_svg_has_links():
    svg = render(build_fixture("s5"), "svg")
    assert 'class="link"' in svg


def test_overlay_from_kraus():
    k = np.diag([1, 1, 1, 0, 0, 0]).astype(complex)
    assert overlay_from_kraus(k) == [0, 1, 2]


def test_render_rejects_unknown_format():
    with pytest.raises(ValueError):
        render(build_fixture("s1"), "png")
