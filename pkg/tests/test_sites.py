import pytest

from locale_forge.errors import NotMaximal, NotStable, NotTransitive
from locale_forge.fincat import identity_functor, mask_of
from locale_forge.gen import arrow_category, fixtures, small_bases, wedge
from locale_forge.morphism import breve, enumerate_morphisms
from locale_forge.sites import (Presheaf, check_comorphism, check_fibration, check_morphism_of_sites,
                                check_sheaf, is_cartesian, preserves_cartesian, topology_axioms,
                                topology_closure, trivial_topology, validate_topology)


def _masks(C, covers):
    return {o: [mask_of(C.arrow(a) for a in s) for s in sieves] for o, sieves in covers.items()}


def _all_sieves_topology(C):
    return validate_topology(C, {c: list(C.sieve_masks(c)) for c in range(len(C.objects))})


def test_trivial_and_maximal_topologies():
    for C in small_bases():
        assert topology_axioms(trivial_topology(C)).ok
        assert topology_axioms(_all_sieves_topology(C)).ok


def test_missing_maximal_sieve_rejected():
    C = arrow_category()
    with pytest.raises(NotMaximal):
        validate_topology(C, _masks(C, {"0": [["id:0"]], "1": []}))


def test_unstable_topology_rejected():
    # the empty sieve covers 1 but its pullback along u, empty on 0, does not cover
    C = arrow_category()
    with pytest.raises(NotStable):
        validate_topology(C, _masks(C, {"0": [["id:0"]], "1": [["id:1", "u"], []]}))


def test_non_transitive_topology_rejected():
    # {f, g} covers •2 and {f} pulls back along f and g to covers, yet {f} is not declared
    C = wedge()
    covers = {"1": [["id:1"], []], "2": [["id:2", "f", "g"], ["f", "g"]], "3": [["id:3"], []]}
    with pytest.raises(NotTransitive):
        validate_topology(C, _masks(C, covers))


def test_closure_gives_a_topology():
    C = wedge()
    x = C.obj("2")
    T = topology_closure(C, [(x, mask_of([C.arrow("f")]))])
    assert topology_axioms(T).ok
    assert T.is_covering(x, mask_of([C.arrow("f")]))


def _constant_presheaf(C, n):
    carriers = tuple(tuple(range(n)) for _ in C.objects)
    return Presheaf(C, carriers, tuple(tuple(range(n)) for _ in C.arrows))


def test_sheaf_condition_under_the_largest_topology():
    C = wedge()
    J = _all_sieves_topology(C)
    assert check_sheaf(_constant_presheaf(C, 1), J).ok
    assert not check_sheaf(_constant_presheaf(C, 2), J).ok
    assert check_sheaf(_constant_presheaf(C, 2), trivial_topology(C)).ok


def test_identity_is_comorphism_and_morphism():
    for C in small_bases():
        I = identity_functor(C)
        J = trivial_topology(C)
        assert check_comorphism(I, J, J).ok
        assert check_morphism_of_sites(I, J, J).ok


def test_total_projection_is_a_fibration():
    for name, P in fixtures().items():
        p = P.total.projection
        assert check_fibration(p).ok, name
        # cartesian lifts of base identities are exactly the vertical identities
        T = P.total.category
        for a in range(len(T.arrows)):
            if T.is_identity(a):
                assert is_cartesian(p, a)


def test_breve_preserves_cartesian_arrows():
    fx = fixtures()
    L1, L2 = fx["z2-diamond"], fx["omega-z2"]
    for f in enumerate_morphisms(L1, L2):
        F, v = breve(f)
        assert v.ok
        assert preserves_cartesian(F, L2.total.projection, L1.total.projection).ok
