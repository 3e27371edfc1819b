import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locale_forge.errors import MalformedInput, MalformedTables
from locale_forge.fincat import (bits, compose_functors, find_terminal, functor_violations, generate_sieve,
                                 identity_functor, mask_of, pullback_sieve, sieves_on, terminal_category,
                                 validate_category)
from locale_forge.gen import all_monoids, arrow_category, cospan_category, small_bases, square_category, wedge, z2


def test_identities_come_first():
    C = wedge()
    assert C.arrows[:3] == ("id:1", "id:2", "id:3")
    assert all(C.is_identity(C.ident[c]) for c in range(len(C.objects)))


def test_composition_with_identities_filled_in():
    C = arrow_category()
    u = C.arrow("u")
    assert C.compose(u, C.ident[C.src[u]]) == u
    assert C.compose(C.ident[C.dst[u]], u) == u


def test_missing_composite_rejected():
    with pytest.raises(MalformedInput):
        validate_category(["*"], [("e", "*", "*")], {})


def test_non_associative_table_rejected():
    # e∘e = f, f∘e = e and e∘f = f: (e∘e)∘e = f∘e = e but e∘(e∘e) = e∘f = f
    comp = {("e", "e"): "f", ("f", "f"): "f", ("e", "f"): "f", ("f", "e"): "e"}
    with pytest.raises(MalformedTables):
        validate_category(["*"], [("e", "*", "*"), ("f", "*", "*")], comp)


def test_terminal_objects():
    assert find_terminal(terminal_category()) == 0
    assert find_terminal(arrow_category()) == arrow_category().obj("1")
    assert find_terminal(wedge()) == wedge().obj("2")
    assert find_terminal(z2()) is None
    assert find_terminal(square_category()) is not None


def test_wedge_sieve_counts():
    # derived by brute force over subsets of incoming arrows
    C = wedge()
    assert [len(C.sieve_masks(c)) for c in range(3)] == [2, 5, 2]


def test_monoid_counts():
    by_order = {}
    for M in all_monoids(3):
        by_order[len(M.arrows)] = by_order.get(len(M.arrows), 0) + 1
    assert by_order == {1: 1, 2: 2, 3: 7}


def test_z2_is_a_group():
    C = z2()
    s = C.arrow("s")
    assert C.compose(s, s) == C.ident[0]


def _brute_sieves(C, c):
    into = list(C.into[c])
    out = set()
    for sel in range(1 << len(into)):
        m = mask_of(into[i] for i in range(len(into)) if sel >> i & 1)
        if all(C.compose(a, k) in set(bits(m)) for a in bits(m) for k in C.into[C.src[a]]):
            out.add(m)
    return out


@pytest.mark.parametrize("C", small_bases(), ids=lambda C: C.name)
def test_sieve_enumeration_matches_brute_force(C):
    for c in range(len(C.objects)):
        assert set(C.sieve_masks(c)) == _brute_sieves(C, c)


bases = st.sampled_from(small_bases())


@st.composite
def sieve_and_arrows(draw):
    C = draw(bases)
    h = draw(st.integers(0, len(C.arrows) - 1))
    d = C.dst[h]
    S = draw(st.sampled_from(sieves_on(C, d)))
    ks = [k for k in range(len(C.arrows)) if C.dst[k] == C.src[h]]
    k = draw(st.sampled_from(ks))
    return C, S, h, k


@settings(max_examples=200, deadline=None)
@given(sieve_and_arrows())
def test_pullback_is_functorial(data):
    C, S, h, k = data
    lhs = pullback_sieve(C, S, C.compose(h, k))
    rhs = pullback_sieve(C, pullback_sieve(C, S, h), k)
    assert lhs == rhs


@settings(max_examples=100, deadline=None)
@given(sieve_and_arrows())
def test_pullback_identity_and_maximal(data):
    C, S, h, _ = data
    d = C.dst[h]
    assert pullback_sieve(C, S, C.ident[d]) == S
    assert pullback_sieve(C, generate_sieve(C, d, C.into[d]), h).mask == C.maximal[C.src[h]]


@settings(max_examples=100, deadline=None)
@given(bases, st.data())
def test_generated_sieve_is_closed(C, data):
    c = data.draw(st.integers(0, len(C.objects) - 1))
    fam = data.draw(st.lists(st.sampled_from(C.into[c]), max_size=4))
    S = generate_sieve(C, c, fam)
    assert C.is_sieve(S.mask)
    assert all(S.mask >> a & 1 for a in fam)


def test_functor_laws():
    C = cospan_category()
    I = identity_functor(C)
    assert functor_violations(I) == []
    assert compose_functors(I, I).arr_map == I.arr_map
