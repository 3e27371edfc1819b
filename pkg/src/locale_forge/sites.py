"""Grothendieck topologies, presheaves, sheaf checks, comorphisms and morphisms of sites."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

from . import limits
from .errors import (CoverLiftFail, MalformedInput, NotCartesianLift, NotMaximal, NotStable,
                     NotTransitive, TargetMismatch)
from .fincat import (FinCategory, FinFunctor, Sieve, bits, comma_category, compose_functors,
                     label_str, mask_of, sieve_key)
from .verdict import Verdict


class Topology:
    """Interface shared by extensional and predicate-defined topologies."""

    cat: FinCategory

    def is_covering(self, c: int, mask: int) -> bool:
        raise NotImplementedError

    def covers_on(self, c: int) -> tuple[int, ...]:
        cache = self.__dict__.setdefault("_covers_cache", {})
        if c not in cache:
            cache[c] = tuple(m for m in self.cat.sieve_masks(c) if self.is_covering(c, m))
        return cache[c]

    def sieve_json(self, c: int, mask: int) -> dict:
        return sieve_json(self.cat, c, mask)


@dataclass(frozen=True, eq=False)
class GrothendieckTopology(Topology):
    cat: FinCategory
    covers: tuple[frozenset, ...]

    def is_covering(self, c: int, mask: int) -> bool:
        return mask in self.covers[c]

    def covers_on(self, c: int) -> tuple[int, ...]:
        return tuple(sorted(self.covers[c], key=sieve_key))

    def same_as(self, other: Topology) -> bool:
        return all(set(self.covers_on(c)) == set(other.covers_on(c)) for c in range(len(self.cat.objects)))


@dataclass(frozen=True, eq=False)
class PredicateTopology(Topology):
    """Covers decided on demand; used for topologies too large to list up front."""

    cat: FinCategory
    predicate: Callable[[int, int], bool]
    name: str = ""

    def is_covering(self, c: int, mask: int) -> bool:
        return self.predicate(c, mask)

    def materialize(self) -> GrothendieckTopology:
        return GrothendieckTopology(self.cat, tuple(frozenset(self.covers_on(c))
                                                    for c in range(len(self.cat.objects))))


def sieve_json(C: FinCategory, c: int, mask: int) -> dict:
    return {"object": label_str(C.objects[c]), "arrows": [label_str(a) for a in C.arrow_labels(mask)]}


# ---------------------------------------------------------------- axioms

def topology_axioms(T: Topology) -> Verdict:
    """First violation of maximality, stability or transitivity, if any."""
    C = T.cat
    for c in range(len(C.objects)):
        if not T.is_covering(c, C.maximal[c]):
            return Verdict(False, [{"axiom": "maximal", "object": label_str(C.objects[c])}])
    for c in range(len(C.objects)):
        for S in T.covers_on(c):
            for h in C.into[c]:
                if not T.is_covering(C.src[h], C.pullback(S, h)):
                    return Verdict(False, [{"axiom": "stable", "sieve": sieve_json(C, c, S),
                                            "arrow": label_str(C.arrows[h])}])
    for c in range(len(C.objects)):
        covers = T.covers_on(c)
        for R in C.sieve_masks(c):
            if T.is_covering(c, R):
                continue
            A = _local_cover_set(T, c, R)
            for S in covers:
                if S & ~A == 0:
                    return Verdict(False, [{"axiom": "transitive", "cover": sieve_json(C, c, S),
                                            "sieve": sieve_json(C, c, R)}])
    return Verdict(True)


def _local_cover_set(T: Topology, c: int, R: int) -> int:
    """{f into c : f*R covers}; a sieve when T is stable."""
    C = T.cat
    return mask_of(f for f in C.into[c] if T.is_covering(C.src[f], C.pullback(R, f)))


def _coerce_covers(C: FinCategory, covers) -> tuple[frozenset, ...]:
    out: list[set] = [set() for _ in C.objects]
    items = covers.items() if isinstance(covers, Mapping) else enumerate(covers)
    for c, masks in items:
        c = c if isinstance(c, int) else C.obj(c)
        for m in masks:
            if isinstance(m, Sieve):
                m = m.mask
            if m & ~C.maximal[c] or not C.is_sieve(m):
                raise MalformedInput("cover is not a sieve on its object",
                                     {"object": label_str(C.objects[c])})
            out[c].add(m)
    return tuple(frozenset(s) for s in out)


def validate_topology(C: FinCategory, covers) -> GrothendieckTopology:
    """``covers`` maps each object (index or label) to sieve masks or Sieve values."""
    T = GrothendieckTopology(C, _coerce_covers(C, covers))
    v = topology_axioms(T)
    if not v.ok:
        w = v.witnesses[0]
        cls = {"maximal": NotMaximal, "stable": NotStable, "transitive": NotTransitive}[w["axiom"]]
        raise cls(f"{w['axiom']} axiom fails", w)
    return T


def trivial_topology(C: FinCategory) -> GrothendieckTopology:
    return GrothendieckTopology(C, tuple(frozenset([m]) for m in C.maximal))


def topology_closure(C: FinCategory, generators: Iterable) -> GrothendieckTopology:
    """Least topology containing the generators (Sieve values or (object, mask) pairs)."""
    covers: list[set] = [set() for _ in C.objects]
    for g in generators:
        c, m = (g.obj, g.mask) if isinstance(g, Sieve) else g
        covers[c].add(m)
    changed = True
    while changed:
        changed = False
        for c in range(len(C.objects)):
            if C.maximal[c] not in covers[c]:
                covers[c].add(C.maximal[c])
                changed = True
        for c in range(len(C.objects)):
            for S in list(covers[c]):
                for h in C.into[c]:
                    p = C.pullback(S, h)
                    if p not in covers[C.src[h]]:
                        covers[C.src[h]].add(p)
                        changed = True
        T = GrothendieckTopology(C, tuple(frozenset(s) for s in covers))
        for c in range(len(C.objects)):
            for R in C.sieve_masks(c):
                if R in covers[c]:
                    continue
                A = _local_cover_set(T, c, R)
                if any(S & ~A == 0 for S in covers[c]):
                    covers[c].add(R)
                    changed = True
    return GrothendieckTopology(C, tuple(frozenset(s) for s in covers))


# ---------------------------------------------------------------- presheaves and sheaves

@dataclass(frozen=True, eq=False)
class Presheaf:
    """Finite presheaf: carrier labels per object, and for f: c → d a map P(d) → P(c)."""

    cat: FinCategory
    carriers: tuple[tuple, ...]
    maps: tuple[tuple[int, ...], ...]


def presheaf_violations(P: Presheaf) -> list:
    C = P.cat
    out = []
    for c in range(len(C.objects)):
        if P.maps[C.ident[c]] != tuple(range(len(P.carriers[c]))):
            out.append({"kind": "identity", "object": label_str(C.objects[c])})
    for (g, f), gf in C.table.items():
        pg, pf = P.maps[g], P.maps[f]
        if P.maps[gf] != tuple(pf[pg[x]] for x in range(len(P.carriers[C.dst[g]]))):
            out.append({"kind": "composition", "pair": [label_str(C.arrows[g]), label_str(C.arrows[f])]})
    return out


def validate_presheaf(P: Presheaf) -> Presheaf:
    from .errors import NotFunctorial
    v = presheaf_violations(P)
    if v:
        raise NotFunctorial("presheaf is not functorial", v)
    return P


def matching_families(P: Presheaf, c: int, S: int):
    """Yield matching families on sieve S as dicts arrow -> element."""
    C = P.cat
    order = sorted(bits(S), key=lambda a: (-C.generated[a].bit_count(), a))
    fam: dict[int, int] = {}
    budget = [0]
    cap = limits.current().maps

    def go(i: int):
        while i < len(order) and order[i] in fam:
            i += 1
        if i == len(order):
            yield dict(fam)
            return
        f = order[i]
        for x in range(len(P.carriers[C.src[f]])):
            budget[0] += 1
            if budget[0] > cap:
                limits.guard(budget[0], "maps", "matching families")
            added = []
            ok = True
            for k, fk in C.precomp[f]:
                y = P.maps[k][x]
                have = fam.get(fk)
                if have is None:
                    fam[fk] = y
                    added.append(fk)
                elif have != y:
                    ok = False
                    break
            if ok:
                yield from go(i + 1)
            for a in added:
                del fam[a]

    yield from go(0)


def check_sheaf(P: Presheaf, J: Topology) -> Verdict:
    """Every matching family on every J-cover has exactly one amalgamation."""
    C = P.cat
    for c in range(len(C.objects)):
        for S in J.covers_on(c):
            for fam in matching_families(P, c, S):
                n = sum(1 for x in range(len(P.carriers[c]))
                        if all(P.maps[f][x] == y for f, y in fam.items()))
                if n != 1:
                    return Verdict(False, [{
                        "cover": sieve_json(C, c, S),
                        "family": {label_str(C.arrows[f]): label_str(P.carriers[C.src[f]][y])
                                   for f, y in sorted(fam.items())},
                        "amalgamations": n}])
    return Verdict(True)


# ---------------------------------------------------------------- comorphisms and morphisms

def _check_topology_pair(F: FinFunctor, J: Topology, K: Topology) -> None:
    if J.cat is not F.source or K.cat is not F.target:
        raise TargetMismatch("topologies do not live on the functor's categories")


def check_comorphism(F: FinFunctor, J: Topology, K: Topology) -> Verdict:
    """Cover lifting: each K-cover R on F(c) has a J-cover S on c with F(S) ⊆ R.

    The arrows f with F(f) ∈ R form a sieve, so it is enough to ask whether that sieve covers.
    """
    _check_topology_pair(F, J, K)
    C, D = F.source, F.target
    for c in range(len(C.objects)):
        for R in K.covers_on(F.obj_map[c]):
            T = mask_of(f for f in C.into[c] if R >> F.arr_map[f] & 1)
            if not J.is_covering(c, T):
                return Verdict(False, [{"object": label_str(C.objects[c]),
                                        "cover": sieve_json(D, F.obj_map[c], R)}])
    return Verdict(True)


def check_morphism_of_sites(F: FinFunctor, J: Topology, K: Topology) -> Verdict:
    """The four conditions: cover preservation, relative terminal, products, equalisers.

    For (2)-(4) the arrows h admitting the required factorisation form a sieve T, and a
    covering family of such arrows exists exactly when T covers.
    """
    _check_topology_pair(F, J, K)
    C, D = F.source, F.target
    fails: list = []
    conds = {}

    w = None
    for c in range(len(C.objects)):
        for S in J.covers_on(c):
            if not K.is_covering(F.obj_map[c], F.image_sieve(S)):
                w = {"cover": sieve_json(C, c, S)}
                break
        if w:
            break
    conds["cover-preserving"] = w is None
    if w:
        fails.append({"condition": 1, **w})

    w = None
    reach = set(F.obj_map)
    for d in range(len(D.objects)):
        T = mask_of(h for h in D.into[d] if any(D.hom(D.src[h], e) for e in reach))
        if not K.is_covering(d, T):
            w = {"object": label_str(D.objects[d])}
            break
    conds["terminal"] = w is None
    if w:
        fails.append({"condition": 2, **w})

    w = None
    nC = len(C.objects)
    for c1 in range(nC):
        for c2 in range(nC):
            # pairs (F(f1)∘k, F(f2)∘k) realised through some c'
            pairs = set()
            for c in range(nC):
                for f1 in C.hom(c, c1):
                    for f2 in C.hom(c, c2):
                        a1, a2 = F.arr_map[f1], F.arr_map[f2]
                        for k in D.into[F.obj_map[c]]:
                            pairs.add((D.table[(a1, k)], D.table[(a2, k)]))
            for g1 in D.into[F.obj_map[c1]]:
                for g2 in D.into[F.obj_map[c2]]:
                    d = D.src[g1]
                    if D.src[g2] != d:
                        continue
                    T = mask_of(h for h in D.into[d]
                                if (D.table[(g1, h)], D.table[(g2, h)]) in pairs)
                    if not K.is_covering(d, T):
                        w = {"objects": [label_str(C.objects[c1]), label_str(C.objects[c2])],
                             "arrows": [label_str(D.arrows[g1]), label_str(D.arrows[g2])]}
                        break
                if w:
                    break
            if w:
                break
        if w:
            break
    conds["products"] = w is None
    if w:
        fails.append({"condition": 3, **w})

    w = None
    for cp in range(nC):
        for c in range(nC):
            par = C.hom(cp, c)
            for i, f1 in enumerate(par):
                for f2 in par[i + 1:]:
                    reach_e = set()
                    for ci in range(nC):
                        for e in C.hom(ci, cp):
                            if C.table[(f1, e)] == C.table[(f2, e)]:
                                Fe = F.arr_map[e]
                                for k in D.into[F.obj_map[ci]]:
                                    reach_e.add(D.table[(Fe, k)])
                    F1, F2 = F.arr_map[f1], F.arr_map[f2]
                    for g in D.into[F.obj_map[cp]]:
                        if D.table[(F1, g)] != D.table[(F2, g)]:
                            continue
                        d = D.src[g]
                        T = mask_of(h for h in D.into[d] if D.table[(g, h)] in reach_e)
                        if not K.is_covering(d, T):
                            w = {"parallel": [label_str(C.arrows[f1]), label_str(C.arrows[f2])],
                                 "arrow": label_str(D.arrows[g])}
                            break
                    if w:
                        break
                if w:
                    break
            if w:
                break
        if w:
            break
    conds["equalizers"] = w is None
    if w:
        fails.append({"condition": 4, **w})
    return Verdict(not fails, fails, {"conditions": conds})


# ---------------------------------------------------------------- fibrations

def is_cartesian(A: FinFunctor, g: int) -> bool:
    """Strict cartesianness of g: d → c for A."""
    C, E = A.source, A.target
    d, c = C.src[g], C.dst[g]
    Ag = A.arr_map[g]
    for gp in C.into[c]:
        dp = C.src[gp]
        for k in E.hom(A.obj_map[dp], A.obj_map[d]):
            if E.table[(Ag, k)] != A.arr_map[gp]:
                continue
            n = sum(1 for u in C.hom(dp, d) if A.arr_map[u] == k and C.table[(g, u)] == gp)
            if n != 1:
                return False
    return True


def check_fibration(A: FinFunctor) -> Verdict:
    """Every arrow into A(c) has a strict cartesian lift at c."""
    C, E = A.source, A.target
    cart = [is_cartesian(A, g) for g in range(len(C.arrows))]
    for c in range(len(C.objects)):
        for f in E.into[A.obj_map[c]]:
            if not any(cart[g] and A.arr_map[g] == f for g in C.into[c]):
                return Verdict(False, [{"object": label_str(C.objects[c]),
                                        "arrow": label_str(E.arrows[f])}])
    return Verdict(True, details={"cartesian": sum(cart)})


def preserves_cartesian(F: FinFunctor, A: FinFunctor, B: FinFunctor) -> Verdict:
    for g in range(len(F.source.arrows)):
        if is_cartesian(A, g) and not is_cartesian(B, F.arr_map[g]):
            return Verdict(False, [{"arrow": label_str(F.source.arrows[g])}])
    return Verdict(True)


# ---------------------------------------------------------------- comma sites and mixing

@dataclass(frozen=True, eq=False)
class CommaSite:
    comma: object               # fincat.CommaCategory
    topology: PredicateTopology
    verdict: Verdict


def comma_site(F: FinFunctor, J: Topology, K: Topology, verify: bool = True) -> CommaSite:
    """(1_D↓F) with K̃: a sieve covers iff its π_D-image generates a K-cover."""
    CC = comma_category(F)
    piD = CC.pi_D
    Kt = PredicateTopology(CC.category,
                           lambda x, m: K.is_covering(piD.obj_map[x], piD.image_sieve(m)), "K~")
    if not verify:
        return CommaSite(CC, Kt, Verdict(None))
    checks = {
        "pi_C comorphism": check_comorphism(CC.pi_C, Kt, J),
        "i_F morphism": check_morphism_of_sites(CC.i_F, J, Kt),
        "pi_D morphism": check_morphism_of_sites(piD, Kt, K),
        "pi_D comorphism": check_comorphism(piD, Kt, K),
    }
    fails = [{"check": k, **(v.witnesses[0] if v.witnesses else {})} for k, v in checks.items() if not v.ok]
    return CommaSite(CC, Kt, Verdict(not fails, fails, {k: bool(v.ok) for k, v in checks.items()}))


@dataclass(frozen=True, eq=False)
class MixingResult:
    H: FinFunctor
    source: CommaSite
    target: CommaSite
    verdict: Verdict


def mixing_square(A: FinFunctor, B: FinFunctor, F: FinFunctor, G: FinFunctor,
                  iso: Sequence[int], J: Topology, K: Topology, L: Topology, M: Topology) -> MixingResult:
    """Build H: (1_D↓F) → (1_F↓G) from the square G∘A ≅ B∘F.

    ``iso[c]`` is an isomorphism B(F(c)) → G(A(c)) in the bottom-right category.
    Raises NotCartesianLift when A or B is not a fibration or F does not preserve
    cartesian arrows, and CoverLiftFail when H is not a comorphism.
    """
    C, D, E, Fc = F.source, F.target, A.target, B.target
    if A.source is not C or B.source is not D or G.source is not E or G.target is not Fc:
        raise TargetMismatch("square does not typecheck")
    for name, fib in (("A", A), ("B", B)):
        v = check_fibration(fib)
        if not v.ok:
            raise NotCartesianLift(f"{name} is not a fibration", v.witnesses[0])
    v = preserves_cartesian(F, A, B)
    if not v.ok:
        raise NotCartesianLift("F does not preserve cartesian arrows", v.witnesses[0])
    pre = {"A comorphism": check_comorphism(A, J, L), "B comorphism": check_comorphism(B, K, M),
           "F morphism": check_morphism_of_sites(F, J, K), "G morphism": check_morphism_of_sites(G, L, M)}
    for c in range(len(C.objects)):
        i = iso[c]
        if Fc.src[i] != B.obj_map[F.obj_map[c]] or Fc.dst[i] != G.obj_map[A.obj_map[c]]:
            raise MalformedInput("iso component has the wrong type", {"object": label_str(C.objects[c])})
        if not any(Fc.table.get((j, i)) == Fc.ident[Fc.src[i]] and Fc.table.get((i, j)) == Fc.ident[Fc.dst[i]]
                   for j in Fc.hom(Fc.dst[i], Fc.src[i])):
            raise MalformedInput("iso component is not invertible", {"object": label_str(C.objects[c])})
    for g in range(len(C.arrows)):
        c1, c2 = C.src[g], C.dst[g]
        if Fc.table[(G.arr_map[A.arr_map[g]], iso[c1])] != Fc.table[(iso[c2], B.arr_map[F.arr_map[g]])]:
            raise MalformedInput("iso is not natural", {"arrow": label_str(C.arrows[g])})

    src = comma_site(F, J, K)
    tgt = comma_site(G, L, M)
    S, T = src.comma, tgt.comma
    tobj = {o: i for i, o in enumerate(T.objs)}
    om = []
    for c, a in S.objs:
        om.append(tobj[(A.obj_map[c], Fc.table[(iso[c], B.arr_map[a])])])
    Scat, Tcat = S.category, T.category
    am = []
    for x in range(len(Scat.arrows)):
        g, h = S.pi_C.arr_map[x], S.pi_D.arr_map[x]
        want = (A.arr_map[g], B.arr_map[h])
        s, t = om[Scat.src[x]], om[Scat.dst[x]]
        cands = [y for y in Tcat.hom(s, t) if (T.pi_C.arr_map[y], T.pi_D.arr_map[y]) == want]
        if len(cands) != 1:
            raise MalformedInput("H is not well defined on an arrow", {"arrow": label_str(Scat.arrows[x])})
        am.append(cands[0])
    H = FinFunctor(Scat, Tcat, tuple(om), tuple(am), "H")
    from .fincat import functor_violations
    fv = functor_violations(H)
    left = compose_functors(A, S.pi_C), compose_functors(T.pi_C, H)
    right = compose_functors(B, S.pi_D), compose_functors(T.pi_D, H)
    commutes = (left[0].obj_map == left[1].obj_map and left[0].arr_map == left[1].arr_map
                and right[0].obj_map == right[1].obj_map and right[0].arr_map == right[1].arr_map)
    como = check_comorphism(H, src.topology, tgt.topology)
    details = {k: bool(v.ok) for k, v in pre.items()}
    details.update({"H functor": not fv, "squares commute": commutes, "H comorphism": bool(como.ok),
                    "source comma site": bool(src.verdict.ok), "target comma site": bool(tgt.verdict.ok)})
    if not como.ok:
        raise CoverLiftFail("H does not lift covers", como.witnesses[0])
    ok = all(details.values())
    wit = [{"check": k} for k, v in details.items() if not v]
    return MixingResult(H, src, tgt, Verdict(ok, wit, details))
