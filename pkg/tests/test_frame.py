import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle as O
from locale_forge.errors import NotALattice, NotAHom, NotDistributive, NotOpen
from locale_forge.frame import (FrameHom, check_open, enumerate_frame_homs, enumerate_open_homs, frame_hom,
                                image_frame, is_open, left_adjoint, open_witnesses, product_frame,
                                right_adjoint, validate_frame)
from locale_forge.gen import boolean_cube, ch3, chain, diamond, frm2, small_frames

FRAMES = small_frames(5)
by_name = {F.name: F for F in FRAMES}


def test_small_frame_census():
    sizes = [F.size for F in FRAMES]
    assert [sizes.count(n) for n in range(1, 6)] == [1, 1, 1, 2, 3]
    assert [F.name for F in FRAMES] == ["ONE", "FRM2", "CH3", "DIA", "CH4", "1+DIA", "DIA+1", "CH5"]


def test_non_lattice_rejected():
    # two maximal elements and no top
    with pytest.raises(NotALattice):
        validate_frame(["0", "a", "b"], [("0", "a"), ("0", "b")])


def test_non_distributive_rejected():
    m3 = ["0", "a", "b", "c", "1"]
    leq = [("0", x) for x in "abc"] + [(x, "1") for x in "abc"]
    with pytest.raises(NotDistributive):
        validate_frame(m3, leq)


def test_heights():
    assert [by_name[n].height for n in ("ONE", "FRM2", "CH3", "DIA", "CH4", "CH5")] == [0, 1, 2, 2, 3, 4]
    assert boolean_cube().height == 3


@pytest.mark.parametrize("F", FRAMES + [boolean_cube()], ids=lambda F: F.name)
def test_tables_match_brute_force(F):
    N = O.NFrame.of(F)
    E = F.elements
    for x, y in itertools.product(range(F.size), repeat=2):
        assert E[F.meet[x][y]] == N.meet(E[x], E[y])
        assert E[F.join[x][y]] == N.join(E[x], E[y])


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(FRAMES + [boolean_cube()]), st.data())
def test_heyting_adjunction(F, data):
    u, v, w = (data.draw(st.integers(0, F.size - 1)) for _ in range(3))
    # w ≤ (u → v) iff w ∧ u ≤ v
    assert F.le(w, F.heyting(u, v)) == F.le(F.meet[w][u], v)


# hom counts (all, open), derived with the brute-force oracle and frozen
HOM_COUNTS = {
    ("CH3", "DIA"): (4, 1),
    ("CH4", "CH4"): (10, 4),
    ("DIA", "DIA"): (4, 4),
    ("CH3", "CH3"): (3, 2),
    ("CH4", "DIA"): (9, 1),
}


@pytest.mark.parametrize("pair", sorted(HOM_COUNTS))
def test_hom_counts(pair):
    K, L = by_name[pair[0]], by_name[pair[1]]
    assert (len(enumerate_frame_homs(K, L)), len(enumerate_open_homs(K, L))) == HOM_COUNTS[pair]


@pytest.mark.parametrize("K,L", list(itertools.product(FRAMES[:6], repeat=2)),
                         ids=lambda F: F.name)
def test_homs_and_openness_match_brute_force(K, L):
    nK, nL = O.NFrame.of(K), O.NFrame.of(L)
    want = {tuple(L.el(h[x]) for x in K.elements) for h in O.homs(nK, nL)}
    got = {h.map for h in enumerate_frame_homs(K, L)}
    assert got == want
    for h in enumerate_frame_homs(K, L):
        d = {K.elements[x]: L.elements[y] for x, y in enumerate(h.map)}
        assert is_open(h) == O.is_open(nK, nL, d)
        frob, heyt = open_witnesses(h)
        # Frobenius and Heyting preservation agree
        assert (frob is None) == (heyt is None)


def test_left_and_right_adjoints():
    for K, L in itertools.product(FRAMES, repeat=2):
        for h in enumerate_frame_homs(K, L):
            l, r = left_adjoint(h), right_adjoint(h)
            for x in range(K.size):
                for y in range(L.size):
                    assert K.le(l[y], x) == L.le(y, h.map[x])
                    assert L.le(h.map[x], y) == K.le(x, r[y])


def test_not_open_hom():
    # CH3 → DIA with a ↦ a is a frame hom but not open
    K, L = ch3(), diamond()
    h = frame_hom(K, L, {"0": "0", "a": "a", "1": "1"})
    with pytest.raises(NotOpen):
        check_open(h)


def test_non_hom_rejected():
    with pytest.raises(NotAHom):
        frame_hom(ch3(), ch3(), {"0": "0", "a": "0", "1": "0"})


def test_image_frame():
    h = frame_hom(ch3(), diamond(), {"0": "0", "a": "a", "1": "1"})
    img, _, _ = image_frame(h)
    assert img.size == 3


def test_product_of_frm2_is_diamond():
    from locale_forge.gen import isomorphic
    assert isomorphic(product_frame(frm2(), frm2()), diamond())
    assert isomorphic(product_frame(frm2(), ch3()), by_name["CH3"]) is False


def test_chain_labels():
    assert chain(2).elements == ("0", "1")
    assert chain(3).elements == ("0", "a", "1")
    assert chain(4).elements == ("0", "1", "2", "3")
