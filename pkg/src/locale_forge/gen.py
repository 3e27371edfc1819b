"""Instance generators: fixed corpora, exhaustive small families and seeded random streams."""
from __future__ import annotations

import itertools
import os
import random
from dataclasses import dataclass
from typing import Iterator

from .fincat import FinCategory, bits, terminal_category, validate_category
from .frame import FinFrame, enumerate_frame_homs, enumerate_open_homs, frame_from_order, is_open, validate_frame
from .intloc import (IntLocalePresentation, constant_presentation, make_presentation, monoid_category,
                     omega_presentation, presentation_violations)

SEED_ENV = "LOCALE_FORGE_SEED"


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


@dataclass(frozen=True)
class GenSpec:
    seed: int = 0
    max_objects: int = 3
    max_arrows: int = 8
    max_frame: int = 4
    kind: str = "presentation"

    def __post_init__(self):
        if min(self.max_objects, self.max_arrows, self.max_frame) <= 0:
            raise ValueError("bounds must be positive")

    def rng(self) -> random.Random:
        return random.Random(self.seed)


# ---------------------------------------------------------------- frames

def chain(n: int, name: str = "") -> FinFrame:
    """n-element chain 0 < 1 < ... < n-1 (labels "0".."n-1"; the 2- and 3-chains use 0/a/1)."""
    if n == 2:
        labels = ["0", "1"]
    elif n == 3:
        labels = ["0", "a", "1"]
    else:
        labels = [str(i) for i in range(n)]
    return validate_frame(labels, list(zip(labels, labels[1:])), name or f"CH{n}")


def one_point() -> FinFrame:
    return validate_frame(["1"], [], "ONE")


def frm2() -> FinFrame:
    return chain(2, "FRM2")


def ch3() -> FinFrame:
    return chain(3, "CH3")


def diamond() -> FinFrame:
    return validate_frame(["0", "a", "b", "1"], [("0", "a"), ("0", "b"), ("a", "1"), ("b", "1")], "DIA")


def boolean_cube() -> FinFrame:
    """2³ as subsets of {x,y,z}."""
    pts = "xyz"
    subs = ["{" + ",".join(s) + "}" for k in range(4) for s in itertools.combinations(pts, k)]
    sets = {l: set(l.strip("{}").split(",")) - {""} for l in subs}
    return frame_from_order(subs, lambda a, b: sets[a] <= sets[b], "2^3")


def corpus_frames() -> list[FinFrame]:
    return [frm2(), ch3(), diamond(), chain(4, "CH4"), boolean_cube()]


def downset_frame(points: list, leq: set[tuple], name: str = "") -> FinFrame:
    """Downsets of a finite poset (``leq`` is the reflexive order), as a frame."""
    n = len(points)
    below = [mask_of_points(n, lambda j, i=i: (points[j], points[i]) in leq) for i in range(n)]
    downs = sorted({m for m in range(1 << n) if all(below[i] & ~m == 0 for i in bits(m))},
                   key=lambda m: (m.bit_count(), m))
    labels = ["{" + ",".join(str(points[i]) for i in bits(m)) + "}" for m in downs]
    by = dict(zip(labels, downs))
    return frame_from_order(labels, lambda a, b: by[a] & ~by[b] == 0, name)


def mask_of_points(n: int, pred) -> int:
    return sum(1 << j for j in range(n) if pred(j))


def _posets(n: int) -> Iterator[set[tuple]]:
    """All partial orders on range(n) (labelled), as reflexive relation sets."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for choice in itertools.product((False, True), repeat=len(pairs)):
        rel = {(i, i) for i in range(n)} | {p for p, c in zip(pairs, choice) if c}
        if any((j, i) in rel for (i, j) in rel if i != j):
            continue
        if all((a, d) in rel for (a, b) in rel for (c, d) in rel if b == c):
            yield rel


def _canon(F: FinFrame) -> tuple:
    n = F.size
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(F.le(perm[i], perm[j]) for i in range(n) for j in range(n))
        if best is None or key < best:
            best = key
    return (n, best)


def isomorphic(A: FinFrame, B: FinFrame) -> bool:
    return A.size == B.size and _canon(A) == _canon(B)


_KNOWN = None


def _known_names() -> dict:
    global _KNOWN
    if _KNOWN is None:
        dia = diamond()
        one_dia = validate_frame(["0", "z", "a", "b", "1"],
                                 [("0", "z"), ("z", "a"), ("z", "b"), ("a", "1"), ("b", "1")], "1+DIA")
        dia_one = validate_frame(["0", "a", "b", "t", "1"],
                                 [("0", "a"), ("0", "b"), ("a", "t"), ("b", "t"), ("t", "1")], "DIA+1")
        named = [one_point(), frm2(), ch3(), chain(4, "CH4"), dia, chain(5, "CH5"), one_dia, dia_one]
        _KNOWN = {_canon(F): F for F in named}
    return _KNOWN


def small_frames(max_size: int) -> list[FinFrame]:
    """Every frame with at most ``max_size`` elements, one per isomorphism class.

    Computed as downset lattices of all posets on at most max_size - 1 points; named
    representatives are substituted where known.
    """
    seen: dict = {}
    for n in range(0, max_size):
        for rel in _posets(n):
            F = downset_frame(list(range(n)), rel)
            if F.size > max_size:
                continue
            key = _canon(F)
            if key not in seen:
                seen[key] = _known_names().get(key, F)
    return sorted(seen.values(), key=lambda F: (F.size, F.height, F.name))


def random_frame(rng: random.Random, max_points: int = 3) -> FinFrame:
    """Downset lattice of a random poset on 1..max_points points."""
    n = rng.randint(1, max_points)
    rel = {(i, i) for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                rel.add((i, j))
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return downset_frame([f"p{i}" for i in range(n)], rel, name=f"D{n}")


def gen_frames(spec: GenSpec, count: int) -> list[FinFrame]:
    """Corpus first, then random downset lattices within ``spec.max_frame`` elements."""
    rng = spec.rng()
    out = corpus_frames()[:count]
    while len(out) < count:
        F = random_frame(rng, 4)
        if F.size <= max(spec.max_frame, 2):
            out.append(F)
    return out


# ---------------------------------------------------------------- categories

def wedge() -> FinCategory:
    """•1 →f •2 ←g •3."""
    return validate_category(["1", "2", "3"], [("f", "1", "2"), ("g", "3", "2")], {}, name="wedge")


def arrow_category() -> FinCategory:
    return validate_category(["0", "1"], [("u", "0", "1")], {}, name="arrow")


def poset_category(points: list, rel: set[tuple], name: str = "") -> FinCategory:
    arrows = [(f"{a}<{b}", a, b) for a in points for b in points if a != b and (a, b) in rel]
    comp = {}
    for (ab, a, b), (cd, c, d) in itertools.product(arrows, repeat=2):
        if b == c:
            comp[(cd, ab)] = f"{a}<{d}" if a != d else f"id:{a}"
    return validate_category(points, arrows, comp, name=name)


def square_category() -> FinCategory:
    """The commutative square ⊥ ≤ l, r ≤ ⊤ as a poset; it has all pullbacks."""
    pts = ["b", "l", "r", "t"]
    rel = {(p, p) for p in pts} | {("b", "l"), ("b", "r"), ("l", "t"), ("r", "t"), ("b", "t")}
    return poset_category(pts, rel, "square")


def cospan_category() -> FinCategory:
    """l → t ← r without a vertex; the wedge up to naming."""
    return validate_category(["l", "t", "r"], [("x", "l", "t"), ("y", "r", "t")], {}, name="cospan")


def z2() -> FinCategory:
    return monoid_category(["1", "s"], {("s", "s"): "1"})


def idempotent_monoid() -> FinCategory:
    return monoid_category(["1", "e"], {("e", "e"): "e"})


def all_monoids(max_order: int = 3) -> list[FinCategory]:
    """Every monoid of order ≤ max_order up to isomorphism, as one-object categories."""
    out = []
    for n in range(1, max_order + 1):
        names = ["1"] + [f"m{i}" for i in range(1, n)]
        seen = set()
        others = list(range(1, n))
        cells = [(a, b) for a in others for b in others]
        for vals in itertools.product(range(n), repeat=len(cells)):
            t = {(0, x): x for x in range(n)} | {(x, 0): x for x in range(n)} | dict(zip(cells, vals))
            if any(t[(t[(a, b)], c)] != t[(a, t[(b, c)])] for a in range(n) for b in range(n) for c in range(n)):
                continue
            key = min(tuple(p[t[(q[a], q[b])]] for a in range(n) for b in range(n))
                      for perm in itertools.permutations(others)
                      for q in [[0, *perm]] for p in [{v: k for k, v in enumerate(q)}])
            if key in seen:
                continue
            seen.add(key)
            mult = {(names[a], names[b]): names[t[(a, b)]] for a in range(1, n) for b in range(1, n)}
            M = monoid_category(names, mult)
            object.__setattr__(M, "name", f"M{n}.{len(seen)}")
            out.append(M)
    return out


def small_bases() -> list[FinCategory]:
    return [terminal_category(), arrow_category(), wedge(), square_category(), z2(), idempotent_monoid()]


# ---------------------------------------------------------------- presentations

def _functorial_inv(base: FinCategory, fibres: list[FinFrame], rng: random.Random | None,
                    first_only: bool = True) -> list[tuple] | None:
    """Choose open inverse-image maps for every arrow so that the assignment is functorial.
    Random order when ``rng`` is given; None when no choice exists."""
    n = len(base.arrows)
    cand = []
    for g in range(n):
        c, d = base.src[g], base.dst[g]
        if base.is_identity(g):
            cand.append([tuple(range(fibres[c].size))])
            continue
        hs = [h.map for h in enumerate_open_homs(fibres[d], fibres[c])]
        if rng is not None:
            rng.shuffle(hs)
        cand.append(hs)
    inv: list = [None] * n
    checks = [[] for _ in range(n)]
    for (g, f), h in base.table.items():
        checks[max(g, f, h)].append((g, f, h))
    result = []

    def go(i: int) -> bool:
        if i == n:
            result.append(list(inv))
            return first_only
        for m in cand[i]:
            inv[i] = m
            if all(inv[h] == tuple(inv[f][inv[g][v]] for v in range(fibres[base.dst[g]].size))
                   for g, f, h in checks[i]):
                if go(i + 1):
                    return True
        inv[i] = None
        return False

    go(0)
    return result[0] if result else None


def random_presentation(rng: random.Random, spec: GenSpec | None = None,
                        bases: list[FinCategory] | None = None) -> IntLocalePresentation | None:
    spec = spec or GenSpec()
    bases = bases or small_bases()
    pool = [F for F in small_frames(spec.max_frame) if F.size > 1] + [one_point()]
    for _ in range(20):
        B = rng.choice(bases)
        fibres = [rng.choice(pool) for _ in B.objects]
        if rng.random() < 0.3:
            fibres = [fibres[0]] * len(B.objects)
        inv = _functorial_inv(B, fibres, rng)
        if inv is not None:
            return make_presentation(B, fibres, inv, name=f"rand/{B.name}")
    return None


def z2_diamond() -> IntLocalePresentation:
    """Z2 acting on DIA by swapping a and b."""
    M, D = z2(), diamond()
    swap = tuple(D.el(x) for x in ["0", "b", "a", "1"])
    return make_presentation(M, [D], [tuple(range(4)) if M.is_identity(a) else swap for a in range(len(M.arrows))],
                             name="z2-diamond")


def corpus_presentations() -> list[tuple[str, IntLocalePresentation]]:
    W = wedge()
    items = [
        ("terminal-ch3", constant_presentation(terminal_category(), ch3(), "terminal-ch3")),
        ("wedge-const-ch3", constant_presentation(W, ch3(), "wedge-const-ch3")),
        ("arrow-const-dia", constant_presentation(arrow_category(), diamond(), "arrow-const-dia")),
        ("square-const-frm2", constant_presentation(square_category(), frm2(), "square-const-frm2")),
        ("omega-wedge", _named(omega_presentation(W), "omega-wedge")),
        ("omega-arrow", _named(omega_presentation(arrow_category()), "omega-arrow")),
        ("omega-z2", _named(omega_presentation(z2()), "omega-z2")),
        ("z2-diamond", z2_diamond()),
        ("idempotent-frm2", constant_presentation(idempotent_monoid(), frm2(), "idempotent-frm2")),
        ("terminal-frm2", constant_presentation(terminal_category(), frm2(), "terminal-frm2")),
        ("terminal-dia", constant_presentation(terminal_category(), diamond(), "terminal-dia")),
    ]
    return items


def _named(P: IntLocalePresentation, name: str) -> IntLocalePresentation:
    object.__setattr__(P, "name", name)
    return P


def fixtures() -> dict[str, IntLocalePresentation]:
    return dict(corpus_presentations())


def gen_presentations(spec: GenSpec, count: int) -> list[tuple[str, IntLocalePresentation]]:
    """Corpus first, then seeded random presentations. Random emissions are valid
    presentations (functorial, open transitions); whether they are internal locales
    is left to the checkers."""
    rng = spec.rng()
    out = corpus_presentations()[:count]
    i = 0
    while len(out) < count:
        P = random_presentation(rng, spec)
        i += 1
        if P is not None:
            out.append((f"random-{i}", P))
    return out


# ---------------------------------------------------------------- monoid actions

def open_actions(M: FinCategory, L: FinFrame) -> list[tuple[tuple[int, ...], ...]]:
    """Every functorial assignment of open endomorphisms of L (inverse images) to M."""
    endos = [h.map for h in enumerate_open_homs(L, L)]
    ident = tuple(range(L.size))
    slots = [a for a in range(len(M.arrows)) if not M.is_identity(a)]
    out = []
    for choice in itertools.product(endos, repeat=len(slots)):
        inv = [ident] * len(M.arrows)
        for a, m in zip(slots, choice):
            inv[a] = m
        if not presentation_violations(M, [L], inv):
            out.append(tuple(inv))
    return out


# ---------------------------------------------------------------- gluing instances

@dataclass(frozen=True)
class GlueInstance:
    parts: tuple[IntLocalePresentation, ...]
    middle: FinFrame
    embeddings: tuple[tuple[int, ...], ...]


def _glue_parts_pool() -> list[IntLocalePresentation]:
    T = terminal_category()
    pool = [constant_presentation(T, F) for F in (frm2(), ch3(), diamond(), one_point())]
    pool.append(constant_presentation(arrow_category(), frm2()))
    pool.append(omega_presentation(arrow_category()))
    pool.append(constant_presentation(wedge(), ch3()))
    pool.append(constant_presentation(wedge(), frm2()))
    return pool


def gen_glue_instances(spec: GenSpec, count: int) -> list[GlueInstance]:
    """Random part lists (1 to 3 parts) with open maps from a random middle frame into
    each part's terminal fibre. Both verdicts occur with reasonable frequency."""
    from .fincat import find_terminal
    rng = spec.rng()
    pool = _glue_parts_pool()
    middles = [F for F in small_frames(5) if F.size >= 2]
    out = []
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        k = rng.randint(1, 3)
        parts = tuple(rng.choice(pool) for _ in range(k))
        mid = rng.choice(middles)
        embs = []
        for Q in parts:
            Lt = Q.fibres[find_terminal(Q.base)]
            hs = [h.map for h in enumerate_frame_homs(mid, Lt) if _open_after(Q, find_terminal(Q.base), mid, h)]
            if not hs:
                break
            embs.append(rng.choice(hs))
        if len(embs) == k:
            out.append(GlueInstance(parts, mid, tuple(embs)))
    return out


def _open_after(Q: IntLocalePresentation, t: int, mid: FinFrame, h) -> bool:
    from .frame import FrameHom
    if not is_open(h):
        return False
    for c in range(len(Q.base.objects)):
        u = Q.base.hom(c, t)[0]
        m = tuple(Q.inv[u][h.map[v]] for v in range(mid.size))
        if not is_open(FrameHom(mid, Q.fibres[c], m)):
            return False
    return True


# ---------------------------------------------------------------- nuclei

def global_sections(P: IntLocalePresentation) -> list[tuple[int, ...]]:
    """Families (a_c) with g⁻¹ a_d = a_c for every g: c → d."""
    B = P.base
    out = []
    for fam in itertools.product(*[range(L.size) for L in P.fibres]):
        if all(P.inv[g][fam[B.dst[g]]] == fam[B.src[g]] for g in range(len(B.arrows))):
            out.append(fam)
    return out


def gen_nuclei(P: IntLocalePresentation, spec: GenSpec, count: int | None = None):
    """Exhaustive within budget; otherwise a seeded sample built from the closed and open
    nuclei of global sections, closed under binary meets and joins."""
    from .errors import BudgetExceeded
    from .nuclei import enumerate_internal_nuclei, nuclei_lattice_ops, validate_internal_nucleus
    try:
        return enumerate_internal_nuclei(P)
    except BudgetExceeded:
        pass
    rng = spec.rng()
    seeds = []
    for a in global_sections(P):
        seeds.append(validate_internal_nucleus(P, [tuple(L.join[x][a[c]] for x in range(L.size))
                                                   for c, L in enumerate(P.fibres)]))
        seeds.append(validate_internal_nucleus(P, [tuple(L.heyting(a[c], x) for x in range(L.size))
                                                   for c, L in enumerate(P.fibres)]))
    pool = {j.components: j for j in seeds}
    target = count or 2 * len(pool)
    for _ in range(10 * target):
        if len(pool) >= target:
            break
        a, b = rng.sample(list(pool.values()), 2) if len(pool) > 1 else (seeds[0], seeds[0])
        for j in nuclei_lattice_ops(P, [a, b]):
            pool.setdefault(j.components, j)
    return [pool[k] for k in sorted(pool)]


# ---------------------------------------------------------------- fixture documents

def fixture_documents() -> list[tuple[str, dict]]:
    """Stable named documents for the command line: presentations, plus categories,
    frames, morphisms, nuclei, gluing, monoid, site-map and sheaf inputs."""
    from .docs import category_to_doc, frame_to_doc, presentation_to_doc
    out = [(name, presentation_to_doc(P)) for name, P in corpus_presentations()]
    out += [("wedge", category_to_doc(wedge())), ("arrow", category_to_doc(arrow_category())),
            ("frm2", frame_to_doc(frm2())), ("ch3", frame_to_doc(ch3())), ("dia", frame_to_doc(diamond()))]
    T = terminal_category()
    tch3 = presentation_to_doc(constant_presentation(T, ch3(), "terminal-ch3"))
    tdia = presentation_to_doc(constant_presentation(T, diamond(), "terminal-dia"))
    tfrm2 = presentation_to_doc(constant_presentation(T, frm2(), "terminal-frm2"))
    out.append(("morph-ch3-dia", {"source": tch3, "target": tdia,
                                  "components": {"*": {"0": "0", "a": "0", "b": "1", "1": "1"}}}))
    out.append(("nucleus-ch3", {"presentation": tch3, "components": {"*": {"0": "a", "a": "a", "1": "1"}}}))
    out.append(("prenucleus-ch3", {"presentation": tch3, "components": {"*": {"0": "a", "a": "1", "1": "1"}}}))
    out.append(("glue-ch3-pair", {"parts": [tch3, tch3], "middle": frame_to_doc(ch3()),
                                  "embeddings": [{"0": "0", "a": "a", "1": "1"}] * 2}))
    out.append(("glue-disjoint", {"parts": [tfrm2, tfrm2], "middle": frame_to_doc(diamond()),
                                  "embeddings": [{"0": "0", "a": "1", "b": "0", "1": "1"},
                                                 {"0": "0", "a": "0", "b": "1", "1": "1"}]}))
    out.append(("monoid-idempotent-frm2", {"elements": ["1", "e"], "mult": {"e.e": "e"},
                                           "frame": frame_to_doc(frm2()), "action": {"e": {"0": "0", "1": "1"}}}))
    out.append(("monoid-z2-diamond", {"elements": ["1", "s"], "mult": {"s.s": "1"},
                                      "frame": frame_to_doc(diamond()),
                                      "action": {"s": {"0": "0", "a": "b", "b": "a", "1": "1"}}}))
    W = category_to_doc(wedge())
    out.append(("sitemap-wedge", {"functor": {"source": W, "target": W, "objects": {"1": "1", "2": "2", "3": "3"},
                                              "arrows": {"f": "f", "g": "g"}},
                                  "source_topology": "trivial", "target_topology": "trivial"}))
    out.append(("sheaf-omega-wedge", {"presentation": presentation_to_doc(fixtures()["omega-wedge"]),
                                      "topology": "trivial"}))
    return out
