import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle as O
from locale_forge.errors import NotANucleus
from locale_forge.gen import GenSpec, ch3, fixtures, gen_nuclei, small_frames
from locale_forge.intloc import check_relative_BC
from locale_forge.nuclei import (PreNucleus, enumerate_internal_nuclei, enumerate_internal_prenuclei,
                                 enumerate_nuclei, enumerate_prenuclei, internal_nucleation, nucleation,
                                 nucleation_trace, nuclei_lattice_ops, nucleus_le, pointwise_join, pointwise_meet,
                                 validate_internal_nucleus, validate_nucleus, validate_prenucleus)

FRAMES = small_frames(5)
by_name = {F.name: F for F in FRAMES}

# derived with the brute-force oracle and frozen
NUCLEI = {"ONE": 1, "FRM2": 2, "CH3": 4, "DIA": 4, "CH4": 8, "1+DIA": 8, "DIA+1": 8, "CH5": 16}
PRENUCLEI = {"ONE": 1, "FRM2": 2, "CH3": 5, "DIA": 4, "CH4": 14, "1+DIA": 13, "DIA+1": 13, "CH5": 42}
INTERNAL = {"terminal-ch3": 4, "wedge-const-ch3": 4, "arrow-const-dia": 4, "square-const-frm2": 2,
            "omega-wedge": 8, "omega-arrow": 4, "omega-z2": 2, "z2-diamond": 2, "idempotent-frm2": 2,
            "terminal-frm2": 2, "terminal-dia": 4}


@pytest.mark.parametrize("name", NUCLEI)
def test_counts(name):
    L = by_name[name]
    assert len(enumerate_nuclei(L)) == NUCLEI[name]
    assert len(enumerate_prenuclei(L)) == PRENUCLEI[name]


@pytest.mark.parametrize("L", FRAMES, ids=lambda L: L.name)
def test_enumeration_matches_brute_force(L):
    N = O.NFrame.of(L)
    as_maps = lambda js: {tuple(L.el(j[x]) for x in L.elements) for j in js}
    assert {j.map for j in enumerate_nuclei(L)} == as_maps(O.nuclei(N))
    assert {p.map for p in enumerate_prenuclei(L)} == as_maps(O.prenuclei(N))


def test_axiom_violations_are_named():
    L = ch3()
    with pytest.raises(NotANucleus, match="inflationary"):
        validate_nucleus(L, {"0": "0", "a": "0", "1": "1"})
    with pytest.raises(NotANucleus, match="idempotent"):
        validate_nucleus(L, {"0": "a", "a": "1", "1": "1"})
    assert validate_prenucleus(L, {"0": "a", "a": "1", "1": "1"}).map == (1, 2, 2)


@pytest.mark.parametrize("name", INTERNAL)
def test_internal_counts(name):
    P = fixtures()[name]
    assert len(enumerate_internal_nuclei(P)) == INTERNAL[name]
    assert len(O.internal_nuclei(O.NPresentation.of(P))) == INTERNAL[name]


def test_pointwise_join_of_nuclei_can_fail_meets():
    L = by_name["DIA+1"]
    j = validate_nucleus(L, {"0": "a", "a": "a", "b": "1", "t": "1", "1": "1"})
    k = validate_nucleus(L, {"0": "b", "a": "1", "b": "b", "t": "1", "1": "1"})
    pj = pointwise_join(L, [j.map, k.map])
    with pytest.raises(NotANucleus, match="meet"):
        validate_prenucleus(L, pj)
    # iteration still gives the least nucleus above both
    top = nucleation_trace(L, pj).result
    above = [n.map for n in enumerate_nuclei(L)
             if all(L.le(x, y) for m in (j.map, k.map) for x, y in zip(m, n.map))]
    assert top in above
    assert all(all(L.le(x, y) for x, y in zip(top, n)) for n in above)


@pytest.mark.parametrize("L", FRAMES, ids=lambda L: L.name)
def test_nucleation_bound_and_limit_stage(L):
    for p in enumerate_prenuclei(L):
        t = nucleation_trace(L, p.map)
        assert t.iterations <= max(L.height - 1, 0)
        # the join of all finite stages is already the fixed point
        assert pointwise_join(L, t.stages) == t.result
        assert validate_nucleus(L, t.result)
        # least: every nucleus above p is above the result
        for n in enumerate_nuclei(L):
            if all(L.le(x, y) for x, y in zip(p.map, n.map)):
                assert all(L.le(x, y) for x, y in zip(t.result, n.map))


@pytest.mark.parametrize("L", FRAMES, ids=lambda L: L.name)
def test_nucleus_absorbs_inner_application(L):
    # j(⋁ U_i) = j(⋁ j U_i) for every subset of elements
    for j in enumerate_nuclei(L):
        for r in range(0, 4):
            for us in itertools.combinations(range(L.size), r):
                assert j.map[L.join_all(us)] == j.map[L.join_all(j.map[u] for u in us)]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(FRAMES), st.data())
def test_nuclei_form_a_lattice_under_pointwise_order(L, data):
    ns = [n.map for n in enumerate_nuclei(L)]
    a, b = data.draw(st.sampled_from(ns)), data.draw(st.sampled_from(ns))
    m = pointwise_meet(L, [a, b])
    assert m in ns
    j = nucleation_trace(L, pointwise_join(L, [a, b])).result
    ups = [n for n in ns if all(L.le(x, y) for x, y in zip(a, n)) and all(L.le(x, y) for x, y in zip(b, n))]
    assert j in ups
    assert all(all(L.le(x, y) for x, y in zip(j, n)) for n in ups)


def test_nucleation_of_prenucleus():
    L = ch3()
    p = PreNucleus(L, (1, 2, 2))
    assert nucleation(p).map == (2, 2, 2)


@pytest.mark.parametrize("name", sorted(n for n, P in fixtures().items() if check_relative_BC(P).ok))
def test_internal_lattice_ops_are_bounds(name):
    P = fixtures()[name]
    nuc = enumerate_internal_nuclei(P)
    for a, b in itertools.combinations_with_replacement(nuc, 2):
        m, j = nuclei_lattice_ops(P, [a, b])
        assert nucleus_le(m, a) and nucleus_le(m, b)
        assert nucleus_le(a, j) and nucleus_le(b, j)
        for n in nuc:
            if nucleus_le(n, a) and nucleus_le(n, b):
                assert nucleus_le(n, m)
            if nucleus_le(a, n) and nucleus_le(b, n):
                assert nucleus_le(j, n)


def test_internal_nucleation_and_validation():
    P = fixtures()["omega-wedge"]
    for p in enumerate_internal_prenuclei(P):
        j = internal_nucleation(p)
        assert validate_internal_nucleus(P, j.components).components == j.components


def test_internal_naturality_enforced():
    P = fixtures()["z2-diamond"]
    D = P.fibres[0]
    # the closed nucleus x ↦ x ∨ a is not invariant under swapping a and b
    with pytest.raises(NotANucleus, match="natural"):
        validate_internal_nucleus(P, [tuple(D.join[x][D.el("a")] for x in range(D.size))])


def test_gen_nuclei_are_nuclei():
    for name in ("omega-wedge", "z2-diamond", "arrow-const-dia"):
        P = fixtures()[name]
        for j in gen_nuclei(P, GenSpec(seed=1)):
            validate_internal_nucleus(P, j.components)
