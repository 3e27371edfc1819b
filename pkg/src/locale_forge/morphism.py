"""Internal locale morphisms f: L1 → L2, stored as inverse-image families f_inv: L2 → L1."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from . import limits
from .errors import (InternalInconsistency, MalformedInput, NotAdjointNatural, NotAHom, NotNatural,
                     TargetMismatch)
from .fincat import FinFunctor, bits, functor_violations, label_str, mask_of
from .frame import enumerate_frame_homs, hom_violation
from .intloc import IntLocalePresentation, omega_presentation, rbc_generator
from .sites import check_morphism_of_sites, preserves_cartesian, sieve_json
from .verdict import Verdict


@dataclass(frozen=True, eq=False)
class IntLocaleMorphism:
    source: IntLocalePresentation                 # L1
    target: IntLocalePresentation                 # L2
    f_inv: tuple[tuple[int, ...], ...]            # per base object c: L2(c) → L1(c)

    def labels(self) -> dict:
        B = self.source.base
        return {label_str(B.objects[c]): {self.target.fibres[c].label(x): self.source.fibres[c].label(y)
                                          for x, y in enumerate(m)}
                for c, m in enumerate(self.f_inv)}


def _same_base(L1: IntLocalePresentation, L2: IntLocalePresentation) -> None:
    if L1.base is not L2.base and (L1.base.objects != L2.base.objects or L1.base.arrows != L2.base.arrows
                                   or dict(L1.base.table) != dict(L2.base.table)):
        raise TargetMismatch("presentations live over different base categories")


def _arrow_violation(L1, L2, f_inv, g: int):
    """Naturality and adjoint naturality along g: c → d, given both components."""
    B = L1.base
    c, d = B.src[g], B.dst[g]
    fc, fd = f_inv[c], f_inv[d]
    for V in range(L2.fibres[d].size):
        if L1.inv[g][fd[V]] != fc[L2.inv[g][V]]:
            return NotNatural, {"arrow": label_str(B.arrows[g]), "element": L2.fibres[d].label(V)}
    for U in range(L2.fibres[c].size):
        if L1.ex[g][fc[U]] != fd[L2.ex[g][U]]:
            return NotAdjointNatural, {"arrow": label_str(B.arrows[g]), "element": L2.fibres[c].label(U)}
    return None


def morphism_violation(L1: IntLocalePresentation, L2: IntLocalePresentation, f_inv):
    """(error class, witness) for the first failing law, or None."""
    B = L1.base
    for c in range(len(B.objects)):
        w = hom_violation(L2.fibres[c], L1.fibres[c], f_inv[c])
        if w:
            return NotAHom, {"object": label_str(B.objects[c]), **w}
    for g in range(len(B.arrows)):
        r = _arrow_violation(L1, L2, f_inv, g)
        if r:
            return r
    return None


def validate_morphism(L1: IntLocalePresentation, L2: IntLocalePresentation, components) -> IntLocaleMorphism:
    """``components`` maps object labels to dicts U2 ↦ U1, or is a per-object index sequence."""
    _same_base(L1, L2)
    B = L1.base
    f_inv = []
    for c, o in enumerate(B.objects):
        if isinstance(components, Mapping):
            try:
                m = components[o]
            except KeyError:
                raise MalformedInput(f"no component at {o!r}", {"object": label_str(o)}) from None
            if isinstance(m, Mapping):
                try:
                    m = tuple(L1.fibres[c].el(m[x]) for x in L2.fibres[c].elements)
                except KeyError as e:
                    raise MalformedInput("component incomplete", {"object": label_str(o),
                                                                  "element": label_str(e.args[0])}) from None
        else:
            m = components[c]
        m = tuple(m)
        if len(m) != L2.fibres[c].size or any(not 0 <= y < L1.fibres[c].size for y in m):
            raise NotAHom("component has the wrong shape", {"object": label_str(o)})
        f_inv.append(m)
    r = morphism_violation(L1, L2, f_inv)
    if r:
        cls, w = r
        raise cls(cls.kind, w)
    return IntLocaleMorphism(L1, L2, tuple(f_inv))


def identity_morphism(L: IntLocalePresentation) -> IntLocaleMorphism:
    return IntLocaleMorphism(L, L, tuple(tuple(range(F.size)) for F in L.fibres))


def compose_morphisms(h: IntLocaleMorphism, f: IntLocaleMorphism) -> IntLocaleMorphism:
    """h∘f for f: L1 → L2, h: L2 → L3; inverse images compose the other way round."""
    if f.target is not h.source:
        raise TargetMismatch("morphisms do not compose")
    return IntLocaleMorphism(f.source, h.target,
                             tuple(tuple(fc[hc[x]] for x in range(len(hc))) for fc, hc in zip(f.f_inv, h.f_inv)))


# ---------------------------------------------------------------- the induced functor

def fibred_functor(L1: IntLocalePresentation, L2: IntLocalePresentation, phi) -> FinFunctor | None:
    """(c, U) ↦ (c, φ_c U) on C⋊L2 → C⋊L1, or None if some arrow has no image."""
    G1, G2 = L1.total, L2.total
    om = tuple(G1.obj_of[(c, phi[c][U])] for c, U in G2.objs)
    am = []
    for g, U, V in G2.arrs:
        a = G1.arr_of.get((g, phi[L2.base.src[g]][U], phi[L2.base.dst[g]][V]))
        if a is None:
            return None
        am.append(a)
    return FinFunctor(G2.category, G1.category, om, tuple(am), "f̆")


def breve(f: IntLocaleMorphism, check: bool = True) -> tuple[FinFunctor, Verdict]:
    """f̆: C⋊L2 → C⋊L1 and its morphism-of-sites verdict for K_{L2}, K_{L1}."""
    F = fibred_functor(f.source, f.target, f.f_inv)
    if F is None or functor_violations(F):
        raise InternalInconsistency("f̆ is not a functor", {})
    if not check:
        return F, Verdict(None)
    v = check_morphism_of_sites(F, f.target.KL, f.source.KL)
    if not v.ok and rbc_generator(f.source).ok and rbc_generator(f.target).ok:
        raise InternalInconsistency("f̆ fails the morphism-of-sites conditions", v.witnesses)
    return F, v


# ---------------------------------------------------------------- surjections and embeddings

def components_injective(f: IntLocaleMorphism) -> Verdict:
    for c, m in enumerate(f.f_inv):
        seen = {}
        for U, y in enumerate(m):
            if y in seen:
                L2 = f.target.fibres[c]
                return Verdict(False, [{"object": label_str(f.source.base.objects[c]),
                                        "elements": [L2.label(seen[y]), L2.label(U)]}])
            seen[y] = U
    return Verdict(True)


def reflects_covers(f: IntLocaleMorphism, F: FinFunctor | None = None) -> Verdict:
    """Every sieve S of C⋊L2 whose image generates a K_{L1}-cover is itself a K_{L2}-cover."""
    F = F or fibred_functor(f.source, f.target, f.f_inv)
    L1, L2 = f.source, f.target
    T2 = L2.total.category
    for x in range(len(T2.objects)):
        y = F.obj_map[x]
        for S in T2.sieve_masks(x):
            if L1.is_covering(y, F.image_sieve(S)) and not L2.is_covering(x, S):
                return Verdict(False, [{"sieve": sieve_json(T2, x, S)}])
    return Verdict(True)


def maximal_cover_witness(f: IntLocaleMorphism) -> dict | None:
    """When f_c(U) = f_c(V) with U ≠ V, the vertical sieve from (c, U) into (c, U∨V) is not
    covering, yet its image is maximal. Returned as a witness for cover reflection."""
    inj = components_injective(f)
    if inj.ok:
        return None
    L2 = f.target
    B = L2.base
    for c, m in enumerate(f.f_inv):
        L = L2.fibres[c]
        for U in range(L.size):
            for V in range(L.size):
                if U != V and m[U] == m[V]:
                    W = L.join[U][V]
                    if W == U:
                        U, V = V, U
                    G = L2.total
                    x = G.obj_of[(c, W)]
                    S = G.category.generated[G.arr_of[(B.ident[c], U, W)]]
                    return {"sieve": sieve_json(G.category, x, S)}
    return None


def is_surjective(f: IntLocaleMorphism) -> Verdict:
    """(a) components injective; (b) f̆ reflects covers. The two must agree."""
    a = components_injective(f)
    flagged = []
    try:
        b = reflects_covers(f)
    except Exception as e:
        from .errors import BudgetExceeded
        if not isinstance(e, BudgetExceeded):
            raise
        b = None
        flagged.append("budget")
    if b is not None and bool(a.ok) != bool(b.ok):
        raise InternalInconsistency("injectivity and cover reflection disagree",
                                    {"injective": a.ok, "reflects": b.ok})
    wit = list(a.witnesses)
    mw = maximal_cover_witness(f)
    if mw:
        wit.append({"reflection": mw})
    details = {"injective": bool(a.ok), "reflects-covers": None if b is None else bool(b.ok)}
    return Verdict(a.ok, wit, details, flagged)


def is_embedding(f: IntLocaleMorphism) -> Verdict:
    for c, m in enumerate(f.f_inv):
        L1 = f.source.fibres[c]
        missing = sorted(set(range(L1.size)) - set(m))
        if missing:
            return Verdict(False, [{"object": label_str(f.source.base.objects[c]),
                                    "missing": [L1.label(y) for y in missing]}])
    return Verdict(True)


# ---------------------------------------------------------------- enumeration

def enumerate_morphisms(L1: IntLocalePresentation, L2: IntLocalePresentation) -> list[IntLocaleMorphism]:
    """All morphisms L1 → L2, in canonical order (objects in order, homs in enumeration order)."""
    _same_base(L1, L2)
    B = L1.base
    n = len(B.objects)
    cands = [[h.map for h in enumerate_frame_homs(L2.fibres[c], L1.fibres[c])] for c in range(n)]
    limits.guard(sum(len(x) for x in cands), "maps", "component candidates")
    # arrows to check once both endpoints are assigned
    due = [[g for g in range(len(B.arrows)) if max(B.src[g], B.dst[g]) == c] for c in range(n)]
    f_inv: list = [None] * n
    out = []
    tried = 0
    cap = limits.current().maps

    def go(c: int) -> None:
        nonlocal tried
        if c == n:
            out.append(IntLocaleMorphism(L1, L2, tuple(f_inv)))
            return
        for m in cands[c]:
            tried += 1
            if tried > cap:
                limits.guard(tried, "maps", "morphism candidates")
            f_inv[c] = m
            if all(_arrow_violation(L1, L2, f_inv, g) is None for g in due[c]):
                go(c + 1)
        f_inv[c] = None

    go(0)
    return out


def _monotone_maps(A, Bf) -> list[tuple[int, ...]]:
    """All order-preserving maps A → B between finite frames."""
    order = A.order
    m = [-1] * A.size
    out = []

    def go(i: int) -> None:
        if i == len(order):
            out.append(tuple(m))
            return
        x = order[i]
        for y in range(Bf.size):
            if all(m[z] < 0 or Bf.le(m[z], y) for z in bits(A.down[x]) if z != x):
                m[x] = y
                go(i + 1)
        m[x] = -1

    go(0)
    return out


def enumerate_fibred_site_morphisms(L1: IntLocalePresentation, L2: IntLocalePresentation) -> list[tuple]:
    """Object maps φ (monotone, not assumed to be homs) for which (c, U) ↦ (c, φ_c U) is a
    morphism of fibrations C⋊L2 → C⋊L1 over C (a functor preserving cartesian arrows)
    and a morphism of sites K_{L2} → K_{L1}."""
    _same_base(L1, L2)
    B = L1.base
    n = len(B.objects)
    cands = [_monotone_maps(L2.fibres[c], L1.fibres[c]) for c in range(n)]
    due = [[g for g in range(len(B.arrows)) if max(B.src[g], B.dst[g]) == c] for c in range(n)]
    phi: list = [None] * n
    found = []
    tried = 0
    cap = limits.current().maps

    def arrow_ok(g: int) -> bool:
        c, d = B.src[g], B.dst[g]
        A2, A1 = L2.fibres[c], L1.fibres[c]
        for U in range(A2.size):
            for V in range(L2.fibres[d].size):
                if A2.le(U, L2.inv[g][V]) and not A1.le(phi[c][U], L1.inv[g][phi[d][V]]):
                    return False
        return True

    def go(c: int) -> None:
        nonlocal tried
        if c == n:
            found.append(tuple(phi))
            return
        for m in cands[c]:
            tried += 1
            if tried > cap:
                limits.guard(tried, "maps", "fibred functor candidates")
            phi[c] = m
            if all(arrow_ok(g) for g in due[c]):
                go(c + 1)
        phi[c] = None

    go(0)
    out = []
    for ph in found:
        F = fibred_functor(L1, L2, ph)
        if F is None or functor_violations(F):
            continue
        if not preserves_cartesian(F, L2.total.projection, L1.total.projection).ok:
            continue
        if check_morphism_of_sites(F, L2.KL, L1.KL).ok:
            out.append(ph)
    return out


# ---------------------------------------------------------------- terminality of Ω

@dataclass(frozen=True, eq=False)
class TerminalCertificate:
    morphism: IntLocaleMorphism
    count: int
    from_formula: bool


def terminal_into_omega(L: IntLocalePresentation, omega: IntLocalePresentation | None = None,
                        certify: bool = True) -> TerminalCertificate:
    """The morphism L → Ω. Candidate component: a sieve S on c goes to ⋁_{g ∈ S} ∃_g ⊤."""
    O = omega or omega_presentation(L.base)
    B = L.base
    f_inv = []
    for c in range(len(B.objects)):
        Lc = L.fibres[c]
        comp = []
        for S in B.sieve_masks(c):
            comp.append(Lc.join_all(L.ex[g][L.fibres[B.src[g]].top] for g in bits(S)))
        f_inv.append(tuple(comp))
    from_formula = morphism_violation(L, O, f_inv) is None
    allm = enumerate_morphisms(L, O) if (certify or not from_formula) else []
    if from_formula:
        m = IntLocaleMorphism(L, O, tuple(f_inv))
    elif allm:
        m = allm[0]
    else:
        raise InternalInconsistency("no morphism into Ω", {})
    if certify and from_formula and all(x.f_inv != m.f_inv for x in allm):
        raise InternalInconsistency("formula morphism missing from enumeration", {})
    return TerminalCertificate(m, len(allm) if certify else -1, from_formula)


# ---------------------------------------------------------------- factorisation

@dataclass(frozen=True, eq=False)
class Factorization:
    surjection: IntLocaleMorphism     # s: L1 → middle
    embedding: IntLocaleMorphism      # e: middle → L2
    middle: IntLocalePresentation


def factorize(f: IntLocaleMorphism) -> Factorization:
    """f = e∘s through L2^j for the nucleus j = f_* f⁻¹ on L2."""
    from .nuclei import nucleus_of_morphism, sublocale_of
    j = nucleus_of_morphism(f)
    sub = sublocale_of(f.target, j)
    M = sub.presentation
    s_inv = tuple(tuple(f.f_inv[c][v] for v in fixed) for c, fixed in enumerate(sub.fixed))
    s = validate_morphism(f.source, M, s_inv)
    e = sub.inclusion
    comp = compose_morphisms(e, s)
    if comp.f_inv != f.f_inv:
        raise InternalInconsistency("factors do not compose to f", {})
    return Factorization(s, e, M)
