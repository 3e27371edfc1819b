import itertools

import pytest

import oracle as O
from locale_forge.errors import NotNatural
from locale_forge.fincat import terminal_category
from locale_forge.gen import ch3, diamond, fixtures, frm2
from locale_forge.intloc import check_relative_BC, constant_presentation, omega_presentation
from locale_forge.morphism import (compose_morphisms, enumerate_morphisms, factorize, identity_morphism,
                                   is_embedding, is_surjective, maximal_cover_witness, terminal_into_omega,
                                   validate_morphism)

FX = {n: P for n, P in fixtures().items() if check_relative_BC(P).ok}

# counts |enumerate_morphisms(L1, L2)|, derived with the brute-force oracle and frozen
COUNTS = {
    ("terminal-ch3", "terminal-ch3"): 3, ("terminal-ch3", "terminal-frm2"): 1, ("terminal-ch3", "terminal-dia"): 2,
    ("arrow-const-dia", "arrow-const-dia"): 4, ("arrow-const-dia", "omega-arrow"): 1,
    ("omega-arrow", "arrow-const-dia"): 0, ("omega-arrow", "omega-arrow"): 1,
    ("square-const-frm2", "square-const-frm2"): 1, ("omega-wedge", "omega-wedge"): 1,
    ("omega-z2", "omega-z2"): 1, ("omega-z2", "z2-diamond"): 0, ("z2-diamond", "omega-z2"): 1,
    ("z2-diamond", "z2-diamond"): 2, ("idempotent-frm2", "idempotent-frm2"): 1,
    ("terminal-frm2", "terminal-ch3"): 2, ("terminal-frm2", "terminal-frm2"): 1, ("terminal-frm2", "terminal-dia"): 2,
    ("terminal-dia", "terminal-ch3"): 4, ("terminal-dia", "terminal-frm2"): 1, ("terminal-dia", "terminal-dia"): 4,
}


@pytest.mark.parametrize("pair", sorted(COUNTS), ids="->".join)
def test_morphism_counts(pair):
    L1, L2 = FX[pair[0]], FX[pair[1]]
    assert len(enumerate_morphisms(L1, L2)) == COUNTS[pair]
    assert len(O.morphisms(O.NPresentation.of(L1), O.NPresentation.of(L2))) == COUNTS[pair]


def test_identity_and_composition():
    L = FX["z2-diamond"]
    ms = enumerate_morphisms(L, L)
    idm = identity_morphism(L)
    assert any(m.f_inv == idm.f_inv for m in ms)
    for f, g in itertools.product(ms, repeat=2):
        h = compose_morphisms(g, f)
        assert any(m.f_inv == h.f_inv for m in ms)


def test_non_natural_family_rejected():
    # the frame hom a ↦ ⊥, b ↦ ⊤ does not commute with the swap s
    L = FX["z2-diamond"]
    D = L.fibres[0]
    comp = [tuple(D.el(v) for v in ("0", "0", "1", "1"))]
    with pytest.raises(NotNatural):
        validate_morphism(L, L, comp)


def test_terminal_map_into_omega():
    for n, L in FX.items():
        cert = terminal_into_omega(L)
        assert cert.count == 1 and cert.from_formula, n


def test_omega_over_terminal_is_frm2():
    Om = omega_presentation(terminal_category())
    assert Om.fibres[0].size == 2


def test_surjection_witness():
    # CH3 → FRM2 over the terminal category collapses two elements of the target fibre
    L1 = constant_presentation(terminal_category(), frm2())
    L2 = constant_presentation(terminal_category(), ch3())
    for f in enumerate_morphisms(L1, L2):
        v = is_surjective(f)
        assert v.ok is False
        assert maximal_cover_witness(f) is not None


def test_factorisation_middle_of_ch3_dia_example():
    # a ↦ 0, b ↦ 1 from DIA into CH3: the middle locale has two elements {a, ⊤}
    L1 = constant_presentation(terminal_category(), ch3())
    L2 = constant_presentation(terminal_category(), diamond())
    f = validate_morphism(L1, L2, [tuple(ch3().el(v) for v in ("0", "0", "1", "1"))])
    fz = factorize(f)
    assert fz.middle.fibres[0].elements == ("a", "1")
    assert is_surjective(fz.surjection).ok and is_embedding(fz.embedding).ok


def test_embeddings_and_surjections_between_frames():
    T = terminal_category()
    for A, B in itertools.product((frm2(), ch3(), diamond()), repeat=2):
        L1, L2 = constant_presentation(T, A), constant_presentation(T, B)
        for f in enumerate_morphisms(L1, L2):
            m = f.f_inv[0]
            assert bool(is_embedding(f).ok) == (set(m) == set(range(A.size)))
            assert bool(is_surjective(f).ok) == (len(set(m)) == B.size)
