"""Nuclei, pre-nuclei, nucleation, internal nuclei, sublocales, Lawvere–Tierney topologies
on the Ω-sheaf, and the frame N(L) of internal nuclei."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import limits
from .errors import InternalInconsistency, MalformedInput, NotANucleus
from .fincat import bits, label_str
from .frame import (FinFrame, FrameHom, check_open, frame_from_order, hom_violation,
                    right_adjoint)
from .intloc import IntLocalePresentation, make_presentation, rbc_generator
from .verdict import Verdict


# ---------------------------------------------------------------- single frames

@dataclass(frozen=True, eq=False)
class Nucleus:
    frame: FinFrame
    map: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.map[x]


@dataclass(frozen=True, eq=False)
class PreNucleus:
    frame: FinFrame
    map: tuple[int, ...]


def _axiom_violation(L: FinFrame, m: Sequence[int], idempotent: bool) -> dict | None:
    n = L.size
    for x in range(n):
        if not L.le(x, m[x]):
            return {"axiom": "inflationary", "element": L.label(x)}
    if idempotent:
        for x in range(n):
            if m[m[x]] != m[x]:
                return {"axiom": "idempotent", "element": L.label(x)}
    for x in range(n):
        for y in range(x + 1, n):
            if m[L.meet[x][y]] != L.meet[m[x]][m[y]]:
                return {"axiom": "meet-preserving", "pair": [L.label(x), L.label(y)]}
    return None


def _as_map(L: FinFrame, m) -> tuple[int, ...]:
    if isinstance(m, Mapping):
        try:
            return tuple(L.el(m[x]) for x in L.elements)
        except KeyError as e:
            raise MalformedInput("map is not total", {"element": label_str(e.args[0])}) from None
    m = tuple(m)
    if len(m) != L.size:
        raise MalformedInput("map is not total", {})
    return m


def _monotone_violation(L: FinFrame, m: Sequence[int]) -> dict | None:
    for x in range(L.size):
        if not L.le(x, m[x]):
            return {"axiom": "inflationary", "element": L.label(x)}
        for y in bits(L.up[x]):
            if not L.le(m[x], m[y]):
                return {"axiom": "monotone", "pair": [L.label(x), L.label(y)]}
    return None


def validate_nucleus(L: FinFrame, m) -> Nucleus:
    m = _as_map(L, m)
    w = _axiom_violation(L, m, True)
    if w:
        raise NotANucleus(f"{w['axiom']} fails", w)
    return Nucleus(L, m)


def validate_prenucleus(L: FinFrame, m) -> PreNucleus:
    m = _as_map(L, m)
    w = _axiom_violation(L, m, False)
    if w:
        raise NotANucleus(f"{w['axiom']} fails", w)
    return PreNucleus(L, m)


def _inflationary_monotone(L: FinFrame) -> list[tuple[int, ...]]:
    order = L.order
    m = [-1] * L.size
    out = []
    cap = limits.current().maps

    def go(i: int) -> None:
        if i == len(order):
            out.append(tuple(m))
            if len(out) > cap:
                limits.guard(len(out), "maps", "inflationary maps")
            return
        x = order[i]
        for y in bits(L.up[x]):
            if all(m[z] < 0 or L.le(m[z], y) for z in bits(L.down[x]) if z != x):
                m[x] = y
                go(i + 1)
        m[x] = -1

    go(0)
    return out


def enumerate_prenuclei(L: FinFrame) -> list[PreNucleus]:
    return [PreNucleus(L, m) for m in sorted(_inflationary_monotone(L))
            if _axiom_violation(L, m, False) is None]


def enumerate_nuclei(L: FinFrame) -> list[Nucleus]:
    """All nuclei on L in canonical (lexicographic) order."""
    return [Nucleus(L, m) for m in sorted(_inflationary_monotone(L))
            if _axiom_violation(L, m, True) is None]


@dataclass(frozen=True)
class NucleationTrace:
    result: tuple[int, ...]
    iterations: int
    stages: tuple[tuple[int, ...], ...]


def nucleation_trace(L: FinFrame, p: Sequence[int]) -> NucleationTrace:
    """Iterate p^{n+1} = p∘p^n from p^1 = p until it stabilises.

    p only needs to be inflationary and monotone. Every orbit U < pU < p²U < ...
    climbs a chain, so p^h is idempotent for h the frame height and the loop runs
    at most h - 1 times.
    """
    p = tuple(p)
    w = _monotone_violation(L, p)
    if w:
        raise NotANucleus(f"{w['axiom']} fails", w)
    stages = [p]
    cur = p
    while True:
        nxt = tuple(p[cur[x]] for x in range(L.size))
        if nxt == cur:
            break
        stages.append(nxt)
        cur = nxt
        if len(stages) > max(L.height, 1):
            raise InternalInconsistency("nucleation exceeded the chain-height bound", {})
    return NucleationTrace(cur, len(stages) - 1, tuple(stages))


def nucleation(p) -> Nucleus:
    """Least nucleus above a pre-nucleus."""
    if isinstance(p, InternalPreNucleus):
        raise TypeError("use internal_nucleation for internal pre-nuclei")
    t = nucleation_trace(p.frame, p.map)
    return validate_nucleus(p.frame, t.result)


def pointwise_join(L: FinFrame, maps: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return tuple(L.join_all(m[x] for m in maps) for x in range(L.size))


def pointwise_meet(L: FinFrame, maps: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return tuple(L.meet_all(m[x] for m in maps) for x in range(L.size))


# ---------------------------------------------------------------- internal nuclei

@dataclass(frozen=True, eq=False)
class InternalNucleus:
    presentation: IntLocalePresentation
    components: tuple[tuple[int, ...], ...]

    def label(self) -> str:
        P = self.presentation
        return "|".join("[" + ",".join(P.fibres[c].label(y) for y in m) + "]"
                        for c, m in enumerate(self.components))


@dataclass(frozen=True, eq=False)
class InternalPreNucleus:
    presentation: IntLocalePresentation
    components: tuple[tuple[int, ...], ...]


def _naturality_violation(P: IntLocalePresentation, comps) -> dict | None:
    """g⁻¹ ∘ j_d = j_c ∘ g⁻¹ for every base arrow g: c → d."""
    B = P.base
    for g in range(len(B.arrows)):
        c, d = B.src[g], B.dst[g]
        for V in range(P.fibres[d].size):
            if P.inv[g][comps[d][V]] != comps[c][P.inv[g][V]]:
                return {"axiom": "natural", "arrow": label_str(B.arrows[g]), "element": P.fibres[d].label(V)}
    return None


def _coerce_components(P: IntLocalePresentation, components) -> tuple[tuple[int, ...], ...]:
    B = P.base
    if isinstance(components, Mapping):
        out = []
        for c, o in enumerate(B.objects):
            m = components.get(o, components.get(c))
            if m is None:
                raise MalformedInput(f"no component at {o!r}", {"object": label_str(o)})
            out.append(_as_map(P.fibres[c], m))
        return tuple(out)
    return tuple(_as_map(P.fibres[c], m) for c, m in enumerate(components))


def internal_violation(P: IntLocalePresentation, comps, idempotent: bool = True) -> dict | None:
    for c, m in enumerate(comps):
        w = _axiom_violation(P.fibres[c], m, idempotent)
        if w:
            return {"object": label_str(P.base.objects[c]), **w}
    return _naturality_violation(P, comps)


def validate_internal_nucleus(P: IntLocalePresentation, components) -> InternalNucleus:
    comps = _coerce_components(P, components)
    w = internal_violation(P, comps)
    if w:
        raise NotANucleus(f"{w['axiom']} fails", w)
    return InternalNucleus(P, comps)


def validate_internal_prenucleus(P: IntLocalePresentation, components) -> InternalPreNucleus:
    comps = _coerce_components(P, components)
    w = internal_violation(P, comps, idempotent=False)
    if w:
        raise NotANucleus(f"{w['axiom']} fails", w)
    return InternalPreNucleus(P, comps)


def _natural_families(P: IntLocalePresentation, per_object: list[list[tuple[int, ...]]]) -> list[tuple]:
    B = P.base
    n = len(B.objects)
    due = [[g for g in range(len(B.arrows)) if max(B.src[g], B.dst[g]) == c] for c in range(n)]
    cur: list = [None] * n
    out = []

    def ok(g: int) -> bool:
        c, d = B.src[g], B.dst[g]
        return all(P.inv[g][cur[d][V]] == cur[c][P.inv[g][V]] for V in range(P.fibres[d].size))

    def go(c: int) -> None:
        if c == n:
            out.append(tuple(cur))
            return
        for m in per_object[c]:
            cur[c] = m
            if all(ok(g) for g in due[c]):
                go(c + 1)
        cur[c] = None

    go(0)
    return out


def enumerate_internal_nuclei(P: IntLocalePresentation) -> list[InternalNucleus]:
    per = [[j.map for j in enumerate_nuclei(L)] for L in P.fibres]
    total = 1
    for x in per:
        total *= len(x)
    limits.guard(total, "maps", "internal nucleus candidates")
    return [InternalNucleus(P, f) for f in _natural_families(P, per)]


def enumerate_internal_prenuclei(P: IntLocalePresentation) -> list[InternalPreNucleus]:
    per = [[p.map for p in enumerate_prenuclei(L)] for L in P.fibres]
    return [InternalPreNucleus(P, f) for f in _natural_families(P, per)]


def internal_nucleation(p: InternalPreNucleus) -> InternalNucleus:
    P = p.presentation
    return validate_internal_nucleus(P, [nucleation_trace(L, m).result for L, m in zip(P.fibres, p.components)])


def nuclei_lattice_ops(P: IntLocalePresentation, nuclei: Sequence[InternalNucleus]) -> tuple[InternalNucleus, InternalNucleus]:
    """(meet, join): meets pointwise, joins by nucleating the pointwise join.

    The pointwise join need not preserve binary meets (two nuclei on the five-element
    frame DIA+1 already break it), so it is only required to be inflationary, monotone
    and natural before iteration. Any nucleus above both is above every stage, which
    makes the fixed point the least upper bound.
    """
    meet = [pointwise_meet(L, [j.components[c] for j in nuclei]) for c, L in enumerate(P.fibres)]
    pj = tuple(pointwise_join(L, [j.components[c] for j in nuclei]) for c, L in enumerate(P.fibres))
    m = validate_internal_nucleus(P, meet)
    w = _naturality_violation(P, pj)
    if w:
        raise InternalInconsistency("pointwise join is not natural", w)
    j = validate_internal_nucleus(P, [nucleation_trace(L, q).result for L, q in zip(P.fibres, pj)])
    return m, j


def nucleus_le(a: InternalNucleus, b: InternalNucleus) -> bool:
    P = a.presentation
    return all(P.fibres[c].le(x, y) for c in range(len(P.fibres)) for x, y in zip(a.components[c], b.components[c]))


# ---------------------------------------------------------------- sublocales

@dataclass(frozen=True, eq=False)
class Sublocale:
    presentation: IntLocalePresentation      # L^j
    inclusion: object                        # morphism.IntLocaleMorphism L^j → L
    fixed: tuple[tuple[int, ...], ...]       # fixed points of j_c as fibre indices


def sublocale_of(P: IntLocalePresentation, j: InternalNucleus) -> Sublocale:
    """L^j: fixed points of each j_c; transitions restricted, left adjoints j_d∘∃_g."""
    from .morphism import validate_morphism
    B = P.base
    fixed, fibres, pos = [], [], []
    for c, L in enumerate(P.fibres):
        fx = tuple(x for x in range(L.size) if j.components[c][x] == x)
        fixed.append(fx)
        fibres.append(frame_from_order([L.elements[x] for x in fx],
                                       lambda a, b, L=L: L.le(L.el(a), L.el(b)), name=f"{L.name}^j"))
        pos.append({x: i for i, x in enumerate(fx)})
    inv = []
    for g in range(len(B.arrows)):
        c, d = B.src[g], B.dst[g]
        inv.append(tuple(pos[c][P.inv[g][v]] for v in fixed[d]))
    M = make_presentation(B, fibres, inv, name=f"{P.name or 'L'}^j")
    for g in range(len(B.arrows)):
        c, d = B.src[g], B.dst[g]
        want = tuple(pos[d][j.components[d][P.ex[g][u]]] for u in fixed[c])
        if M.ex[g] != want:
            raise InternalInconsistency("left adjoint of a restricted transition is not j∘∃",
                                        {"arrow": label_str(B.arrows[g])})
    v = rbc_generator(M)
    if not v.ok:
        raise InternalInconsistency("sublocale fails relative Beck–Chevalley", v.witnesses[0])
    e = validate_morphism(M, P, [tuple(pos[c][j.components[c][u]] for u in range(P.fibres[c].size))
                                  for c in range(len(B.objects))])
    return Sublocale(M, e, tuple(fixed))


def nucleus_of_morphism(f) -> InternalNucleus:
    """f_* ∘ f⁻¹ on the target, componentwise."""
    P = f.target
    comps = []
    for c, m in enumerate(f.f_inv):
        h = FrameHom(P.fibres[c], f.source.fibres[c], m)
        r = right_adjoint(h)
        comps.append(tuple(r[m[u]] for u in range(P.fibres[c].size)))
    return validate_internal_nucleus(P, comps)


def nucleus_of_embedding(f) -> InternalNucleus:
    from .morphism import is_embedding
    v = is_embedding(f)
    if not v.ok:
        raise MalformedInput("morphism is not an embedding", v.witnesses[0])
    return nucleus_of_morphism(f)


# ---------------------------------------------------------------- Lawvere–Tierney topologies

@dataclass(frozen=True, eq=False)
class LTTopologyCandidate:
    """Per total object (c, U), an endomap of {V ≤ U} given on fibre indices."""

    presentation: IntLocalePresentation
    components: tuple[Mapping[int, int], ...]


def _below(P: IntLocalePresentation, x: int) -> list[int]:
    c, U = P.total.objs[x]
    L = P.fibres[c]
    return [v for v in range(L.size) if L.le(v, U)]


def lt_violation(P: IntLocalePresentation, comps: Sequence[Mapping[int, int]]) -> dict | None:
    G, T = P.total, P.total.category
    for x, (c, U) in enumerate(G.objs):
        L = P.fibres[c]
        j = comps[x]
        below = _below(P, x)
        where = {"object": label_str(T.objects[x])}
        if j[U] != U:
            return {"axiom": "unit", **where}
        for v in below:
            if j[j[v]] != j[v]:
                return {"axiom": "idempotent", "element": L.label(v), **where}
        for v, w in itertools.combinations(below, 2):
            if j[L.meet[v][w]] != L.meet[j[v]][j[w]]:
                return {"axiom": "meet-preserving", "pair": [L.label(v), L.label(w)], **where}
    for a, (g, U, W) in enumerate(G.arrs):
        c = P.base.src[g]
        d = P.base.dst[g]
        L, Ld = P.fibres[c], P.fibres[d]
        jx, jy = comps[T.src[a]], comps[T.dst[a]]
        for v in range(Ld.size):
            if not Ld.le(v, W):
                continue
            if jx[L.meet[P.inv[g][v]][U]] != L.meet[P.inv[g][jy[v]]][U]:
                return {"axiom": "natural", "arrow": label_str(T.arrows[a]), "element": Ld.label(v)}
    return None


def lt_from_internal_nucleus(P: IntLocalePresentation, k: InternalNucleus) -> LTTopologyCandidate:
    """k^f_{(c,U)}(V) = k_c(V) ∧ U."""
    comps = []
    for x, (c, U) in enumerate(P.total.objs):
        L = P.fibres[c]
        comps.append({v: L.meet[k.components[c][v]][U] for v in _below(P, x)})
    w = lt_violation(P, comps)
    if w:
        raise InternalInconsistency("forward image is not a Lawvere–Tierney topology", w)
    return LTTopologyCandidate(P, tuple(comps))


def internal_nucleus_from_lt(P: IntLocalePresentation, j: LTTopologyCandidate) -> InternalNucleus:
    """j ↦ j_{(c,⊤)}."""
    w = lt_violation(P, j.components)
    if w:
        raise NotANucleus(f"not a Lawvere–Tierney topology ({w['axiom']})", w)
    comps = []
    for c, L in enumerate(P.fibres):
        x = P.total.obj_of[(c, L.top)]
        comps.append(tuple(j.components[x][v] for v in range(L.size)))
    return validate_internal_nucleus(P, comps)


def enumerate_lt_topologies(P: IntLocalePresentation) -> list[LTTopologyCandidate]:
    """Independent search: per-object maps on {V ≤ U} that fix U, are idempotent and
    meet-preserving, filtered by naturality over every arrow of C⋊L."""
    G, T = P.total, P.total.category
    per = []
    for x, (c, U) in enumerate(G.objs):
        L = P.fibres[c]
        below = _below(P, x)
        cands = []
        for img in itertools.product(below, repeat=len(below)):
            j = dict(zip(below, img))
            if j[U] != U:
                continue
            if any(j[j[v]] != j[v] for v in below):
                continue
            if any(j[L.meet[v][w]] != L.meet[j[v]][j[w]] for v, w in itertools.combinations(below, 2)):
                continue
            cands.append(j)
        per.append(cands)
    n = len(G.objs)
    due = [[a for a in range(len(T.arrows)) if max(T.src[a], T.dst[a]) == x] for x in range(n)]
    cur: list = [None] * n
    out = []

    def ok(a: int) -> bool:
        g, U, W = G.arrs[a]
        L, Ld = P.fibres[P.base.src[g]], P.fibres[P.base.dst[g]]
        jx, jy = cur[T.src[a]], cur[T.dst[a]]
        return all(jx[L.meet[P.inv[g][v]][U]] == L.meet[P.inv[g][jy[v]]][U]
                   for v in range(Ld.size) if Ld.le(v, W))

    def go(x: int) -> None:
        if x == n:
            out.append(LTTopologyCandidate(P, tuple(dict(j) for j in cur)))
            return
        for j in per[x]:
            cur[x] = j
            if all(ok(a) for a in due[x]):
                go(x + 1)
        cur[x] = None

    go(0)
    return out


# ---------------------------------------------------------------- N(L)

@dataclass(frozen=True, eq=False)
class NucleiFrame:
    frame: FinFrame
    nuclei: tuple[InternalNucleus, ...]
    projections: tuple[FrameHom, ...]          # π_c: N(L) → N(L_c)
    verdict: Verdict


def nuclei_frame(P: IntLocalePresentation) -> NucleiFrame:
    """All internal nuclei under the pointwise order, checked to form a frame whose
    lattice operations agree with the pointwise-meet and nucleated-join formulas."""
    nuc = tuple(enumerate_internal_nuclei(P))
    labels = [j.label() for j in nuc]
    idx = {l: i for i, l in enumerate(labels)}
    N = frame_from_order(labels, lambda a, b: nucleus_le(nuc[idx[a]], nuc[idx[b]]), name="N")
    fails = []
    for a in range(len(nuc)):
        for b in range(a, len(nuc)):
            m, j = nuclei_lattice_ops(P, [nuc[a], nuc[b]])
            if m.components != nuc[N.meet[a][b]].components:
                fails.append({"op": "meet", "pair": [labels[a], labels[b]]})
            if j.components != nuc[N.join[a][b]].components:
                fails.append({"op": "join", "pair": [labels[a], labels[b]]})
    projs = []
    for c, L in enumerate(P.fibres):
        local = enumerate_nuclei(L)
        lab = ["[" + ",".join(L.label(y) for y in k.map) + "]" for k in local]
        li = {k.map: i for i, k in enumerate(local)}
        Nc = frame_from_order(lab, lambda a, b, lab=lab, local=local, L=L: all(
            L.le(x, y) for x, y in zip(local[lab.index(a)].map, local[lab.index(b)].map)), name=f"N({L.name})")
        h = FrameHom(N, Nc, tuple(li[j.components[c]] for j in nuc))
        w = hom_violation(N, Nc, h.map)
        if w:
            fails.append({"projection": label_str(P.base.objects[c]), **w})
            continue
        try:
            check_open(h)
        except Exception as e:
            fails.append({"projection": label_str(P.base.objects[c]), "open": False,
                          "witness": getattr(e, "witness", None)})
        projs.append(h)
    return NucleiFrame(N, nuc, tuple(projs), Verdict(not fails, fails, {"size": N.size}))
