"""Brute-force reference implementations used to derive and cross-check expected values.

Only raw data (element labels, the order relation, arrow labels, composition and the
transition maps) is read from library objects. Everything else is recomputed here by
exhaustive search, without the library's tables, adjoint formulas or sieve machinery.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass


@dataclass
class NFrame:
    els: list
    le: set

    @classmethod
    def of(cls, F):
        els = list(F.elements)
        return cls(els, {(els[x], els[y]) for x in range(F.size) for y in range(F.size) if F.le(x, y)})

    def leq(self, a, b):
        return (a, b) in self.le

    def meet(self, a, b):
        lows = [z for z in self.els if self.leq(z, a) and self.leq(z, b)]
        return next(z for z in lows if all(self.leq(w, z) for w in lows))

    def join(self, a, b):
        ups = [z for z in self.els if self.leq(a, z) and self.leq(b, z)]
        return next(z for z in ups if all(self.leq(z, w) for w in ups))

    def join_all(self, xs):
        acc = self.bottom
        for x in xs:
            acc = self.join(acc, x)
        return acc

    @property
    def bottom(self):
        return next(z for z in self.els if all(self.leq(z, w) for w in self.els))

    @property
    def top(self):
        return next(z for z in self.els if all(self.leq(w, z) for w in self.els))


def is_nucleus(F: NFrame, j: dict, idempotent=True) -> bool:
    if not all(F.leq(x, j[x]) for x in F.els):
        return False
    if idempotent and any(j[j[x]] != j[x] for x in F.els):
        return False
    return all(j[F.meet(x, y)] == F.meet(j[x], j[y]) for x in F.els for y in F.els)


def all_maps(A: list, B: list):
    for img in itertools.product(B, repeat=len(A)):
        yield dict(zip(A, img))


def nuclei(F: NFrame) -> list[dict]:
    return [j for j in all_maps(F.els, F.els) if is_nucleus(F, j)]


def prenuclei(F: NFrame) -> list[dict]:
    return [j for j in all_maps(F.els, F.els) if is_nucleus(F, j, idempotent=False)]


def is_hom(K: NFrame, L: NFrame, h: dict) -> bool:
    return (h[K.bottom] == L.bottom and h[K.top] == L.top
            and all(h[K.meet(x, y)] == L.meet(h[x], h[y]) and h[K.join(x, y)] == L.join(h[x], h[y])
                    for x in K.els for y in K.els))


def homs(K: NFrame, L: NFrame) -> list[dict]:
    return [h for h in all_maps(K.els, L.els) if is_hom(K, L, h)]


def left_adjoint(K: NFrame, L: NFrame, h: dict) -> dict | None:
    out = {}
    for y in L.els:
        cands = [x for x in K.els if L.leq(y, h[x])]
        least = [x for x in cands if all(K.leq(x, z) for z in cands)]
        if not least:
            return None
        out[y] = least[0]
    return out


def is_open(K: NFrame, L: NFrame, h: dict) -> bool:
    l = left_adjoint(K, L, h)
    return l is not None and all(l[L.meet(y, h[x])] == K.meet(l[y], x) for x in K.els for y in L.els)


# ---------------------------------------------------------------- presentations

@dataclass
class NPresentation:
    objects: list
    arrows: list            # (label, src, dst)
    comp: dict              # (g, f) -> g∘f on labels
    fibres: dict            # object -> NFrame
    inv: dict               # arrow -> {V in fibre(dst): g⁻¹V in fibre(src)}

    @classmethod
    def of(cls, P):
        B = P.base
        arrows = [(B.arrows[a], B.objects[B.src[a]], B.objects[B.dst[a]]) for a in range(len(B.arrows))]
        comp = {(B.arrows[g], B.arrows[f]): B.arrows[h] for (g, f), h in B.table.items()}
        fibres = {o: NFrame.of(P.fibres[c]) for c, o in enumerate(B.objects)}
        inv = {}
        for a in range(len(B.arrows)):
            Ld, Lc = P.fibres[B.dst[a]], P.fibres[B.src[a]]
            inv[B.arrows[a]] = {Ld.elements[v]: Lc.elements[P.inv[a][v]] for v in range(Ld.size)}
        return cls(list(B.objects), arrows, comp, fibres, inv)

    def ex(self, g: str, U):
        cache = self.__dict__.setdefault("_ex", {})
        if g not in cache:
            _, c, d = next(a for a in self.arrows if a[0] == g)
            cache[g] = left_adjoint(self.fibres[d], self.fibres[c], self.inv[g])
        return cache[g][U]


def total(P: NPresentation):
    """Objects (c, U); arrows (g, U, V) with U ≤ g⁻¹V; composition from the base."""
    objs = [(o, U) for o in P.objects for U in P.fibres[o].els]
    arrs = []
    for g, c, d in P.arrows:
        for U in P.fibres[c].els:
            for V in P.fibres[d].els:
                if P.fibres[c].leq(U, P.inv[g][V]):
                    arrs.append((g, c, U, d, V))
    return objs, arrs


def _sieves_on(arrs_into: list, pre: dict) -> list[frozenset]:
    """All subsets of arrows into an object closed under precomposition."""
    out = []
    n = len(arrs_into)
    for bitsel in range(1 << n):
        S = frozenset(arrs_into[i] for i in range(n) if bitsel >> i & 1)
        if all(pre[a] <= S for a in S):
            out.append(S)
    return out


def kl_is_topology(P: NPresentation, max_into: int = 16) -> bool | None:
    """Decide whether K_L satisfies maximality, stability and transitivity on C⋊L.
    None when some object has too many incoming arrows to enumerate."""
    objs, arrs = total(P)
    into = {x: [a for a in arrs if (a[3], a[4]) == x] for x in objs}
    if max(len(v) for v in into.values()) > max_into:
        return None

    def compose(b, a):
        # b ∘ a where a: (c,U) → (d,V), b: (d,V) → (e,W)
        return (P.comp[(b[0], a[0])], a[1], a[2], b[3], b[4])

    pre = {b: frozenset(compose(b, a) for a in arrs if (a[3], a[4]) == (b[1], b[2])) for b in arrs}
    sieves = {x: _sieves_on(into[x], pre) for x in objs}

    def covers(x, S):
        o, V = x
        L = P.fibres[o]
        return L.join_all(P.ex(a[0], a[2]) for a in S) == V

    def pullback(S, h):
        return frozenset(a for a in arrs if (a[3], a[4]) == (h[1], h[2]) and compose(h, a) in S)

    for x in objs:
        full = frozenset(into[x])
        if not covers(x, full):
            return False
    for h in arrs:
        y = (h[3], h[4])
        for S in sieves[y]:
            if covers(y, S) and not covers((h[1], h[2]), pullback(S, h)):
                return False
    for x in objs:
        cov = [S for S in sieves[x] if covers(x, S)]
        for R in sieves[x]:
            if covers(x, R):
                continue
            for S in cov:
                if all(covers((a[1], a[2]), pullback(R, a)) for a in S):
                    return False
    return True


def morphisms(L1: NPresentation, L2: NPresentation) -> list[dict]:
    """Natural families of frame homs L2(c) → L1(c) whose left adjoints are natural too."""
    per = [homs(L2.fibres[o], L1.fibres[o]) for o in L1.objects]
    out = []
    for fam in itertools.product(*per):
        f = dict(zip(L1.objects, fam))
        ok = True
        for g, c, d in L1.arrows:
            if any(L1.inv[g][f[d][V]] != f[c][L2.inv[g][V]] for V in L2.fibres[d].els):
                ok = False
                break
            if any(L1.ex(g, f[c][U]) != f[d][L2.ex(g, U)] for U in L2.fibres[c].els):
                ok = False
                break
        if ok:
            out.append(f)
    return out


def internal_nuclei(P: NPresentation) -> list[dict]:
    per = [nuclei(P.fibres[o]) for o in P.objects]
    out = []
    for fam in itertools.product(*per):
        j = dict(zip(P.objects, fam))
        if all(P.inv[g][j[d][V]] == j[c][P.inv[g][V]] for g, c, d in P.arrows for V in P.fibres[d].els):
            out.append(j)
    return out
