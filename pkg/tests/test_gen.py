import random

import oracle as O

from hypothesis import given, settings
from hypothesis import strategies as st

from locale_forge.docs import presentation_to_doc
from locale_forge.gen import (GenSpec, corpus_presentations, default_seed, fixture_documents, gen_frames,
                              gen_glue_instances, gen_presentations, isomorphic, random_frame, small_frames)
from locale_forge.intloc import presentation_violations


def _docs(items):
    return [(n, presentation_to_doc(P)) for n, P in items]


def test_presentations_deterministic():
    a = _docs(gen_presentations(GenSpec(seed=5), 30))
    b = _docs(gen_presentations(GenSpec(seed=5), 30))
    assert a == b
    c = _docs(gen_presentations(GenSpec(seed=6), 30))
    assert a[:11] == c[:11] and a != c


def test_corpus_comes_first():
    names = [n for n, _ in gen_presentations(GenSpec(seed=0), 15)]
    assert names[:11] == [n for n, _ in corpus_presentations()]
    assert all(n.startswith("random-") for n in names[11:])
    assert len(set(names)) == len(names)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("LOCALE_FORGE_SEED", "42")
    assert default_seed() == 42
    monkeypatch.delenv("LOCALE_FORGE_SEED")
    assert default_seed() == 0


def test_generated_presentations_are_valid():
    for name, P in gen_presentations(GenSpec(seed=2), 60):
        assert presentation_violations(P.base, P.fibres, P.inv) == [], name


def test_small_frames_pairwise_non_isomorphic():
    fs = small_frames(5)
    for i, A in enumerate(fs):
        for B in fs[i + 1:]:
            assert not isomorphic(A, B)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_random_frames_are_distributive_lattices(seed):
    F = random_frame(random.Random(seed), max_points=3)
    N = O.NFrame.of(F)
    E = F.elements
    for x in range(F.size):
        for y in range(F.size):
            assert E[F.meet[x][y]] == N.meet(E[x], E[y])
            for z in range(F.size):
                assert F.meet[x][F.join[y][z]] == F.join[F.meet[x][y]][F.meet[x][z]]


def test_gen_frames_deterministic():
    a = [F.elements for F in gen_frames(GenSpec(seed=9), 10)]
    assert a == [F.elements for F in gen_frames(GenSpec(seed=9), 10)]


def test_glue_instances_deterministic():
    a = gen_glue_instances(GenSpec(seed=4), 20)
    b = gen_glue_instances(GenSpec(seed=4), 20)
    assert [(i.middle.name, i.embeddings) for i in a] == [(i.middle.name, i.embeddings) for i in b]


def test_fixture_document_names_unique():
    names = [n for n, _ in fixture_documents()]
    assert len(names) == len(set(names))
    assert {"wedge-const-ch3", "omega-wedge", "z2-diamond", "morph-ch3-dia"} <= set(names)
