"""Finite frames (finite distributive lattices), frame homomorphisms and their adjoints."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from . import limits
from .errors import NoLeftAdjoint, NotAHom, NotALattice, NotAPoset, NotDistributive, NotOpen
from .fincat import bits, label_str


@dataclass(frozen=True, eq=False)
class FinFrame:
    elements: tuple
    up: tuple[int, ...]                  # up[x]: mask of y with x ≤ y
    meet: tuple[tuple[int, ...], ...]
    join: tuple[tuple[int, ...], ...]
    bottom: int
    top: int
    name: str = ""

    def __repr__(self):
        return f"FinFrame({self.name or '?'}, {self.size} elements)"

    @property
    def size(self) -> int:
        return len(self.elements)

    def le(self, x: int, y: int) -> bool:
        return bool(self.up[x] >> y & 1)

    @cached_property
    def down(self) -> tuple[int, ...]:
        return tuple(sum(1 << x for x in range(self.size) if self.up[x] >> y & 1)
                     for y in range(self.size))

    @cached_property
    def index(self) -> dict:
        return {e: i for i, e in enumerate(self.elements)}

    def el(self, label: Hashable) -> int:
        return self.index[label]

    def join_all(self, xs: Iterable[int]) -> int:
        out = self.bottom
        j = self.join
        for x in xs:
            out = j[out][x]
        return out

    def meet_all(self, xs: Iterable[int]) -> int:
        out = self.top
        m = self.meet
        for x in xs:
            out = m[out][x]
        return out

    @cached_property
    def implication(self) -> tuple[tuple[int, ...], ...]:
        """Heyting implication table: imp[u][v] = ⋁{w : w ∧ u ≤ v}."""
        n = self.size
        return tuple(
            tuple(self.join_all(w for w in range(n) if self.le(self.meet[w][u], v)) for v in range(n))
            for u in range(n))

    def heyting(self, u: int, v: int) -> int:
        return self.implication[u][v]

    @cached_property
    def order(self) -> tuple[int, ...]:
        """A linear extension: elements sorted by the size of their principal downset."""
        return tuple(sorted(range(self.size), key=lambda x: (self.down[x].bit_count(), x)))

    @cached_property
    def height(self) -> int:
        """Length of the longest chain ⊥ < ... < ⊤ (number of steps)."""
        h = [0] * self.size
        for y in self.order:
            for x in bits(self.down[y]):
                if x != y:
                    h[y] = max(h[y], h[x] + 1)
        return h[self.top]

    def is_trivial(self) -> bool:
        return self.size == 1

    def label(self, x: int) -> str:
        return label_str(self.elements[x])


def _from_relation(elements: tuple, rel: list[list[bool]], name: str) -> FinFrame:
    n = len(elements)
    if n == 0:
        raise NotALattice("empty poset has no top", {})
    for x in range(n):
        rel[x][x] = True
    # transitive closure
    for k in range(n):
        rk = rel[k]
        for i in range(n):
            if rel[i][k]:
                ri = rel[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    for i in range(n):
        for j in range(i + 1, n):
            if rel[i][j] and rel[j][i]:
                raise NotAPoset("antisymmetry fails", {"pair": [label_str(elements[i]), label_str(elements[j])]})
    up = tuple(sum(1 << y for y in range(n) if rel[x][y]) for x in range(n))
    down = tuple(sum(1 << x for x in range(n) if rel[x][y]) for y in range(n))

    def best(mask: int, cover: tuple[int, ...], kind: str, pair) -> int:
        for z in bits(mask):
            if mask & ~cover[z] == 0:
                return z
        raise NotALattice(f"no {kind}", {"kind": kind, "pair": [label_str(elements[p]) for p in pair]})

    meet = tuple(tuple(best(down[x] & down[y], down, "meet", (x, y)) for y in range(n)) for x in range(n))
    join = tuple(tuple(best(up[x] & up[y], up, "join", (x, y)) for y in range(n)) for x in range(n))
    bottom = best((1 << n) - 1, up, "bottom", ())
    top = best((1 << n) - 1, down, "top", ())
    F = FinFrame(elements, up, meet, join, bottom, top, name)
    for u, a, b in itertools.product(range(n), repeat=3):
        if b < a:
            continue
        if meet[u][join[a][b]] != join[meet[u][a]][meet[u][b]]:
            raise NotDistributive("meet does not distribute over join",
                                  {"triple": [label_str(elements[t]) for t in (u, a, b)]})
    return F


def validate_frame(elements: Sequence, leq: Iterable[tuple], name: str = "") -> FinFrame:
    """Frame from element labels and generating pairs x ≤ y.

    Reflexive and transitive closure are added.
    """
    elements = tuple(elements)
    idx = {e: i for i, e in enumerate(elements)}
    if len(idx) != len(elements):
        raise NotAPoset("duplicate element labels", {})
    rel = [[False] * len(elements) for _ in elements]
    for x, y in leq:
        if x not in idx or y not in idx:
            raise NotAPoset("order mentions an unknown element", {"pair": [label_str(x), label_str(y)]})
        rel[idx[x]][idx[y]] = True
    return _from_relation(elements, rel, name)


def frame_from_order(elements: Sequence, le: Callable[[object, object], bool], name: str = "") -> FinFrame:
    elements = tuple(elements)
    rel = [[bool(le(x, y)) for y in elements] for x in elements]
    return _from_relation(elements, rel, name)


def check_frame(F: FinFrame) -> FinFrame:
    """Re-derive the lattice structure from the order and compare."""
    G = _from_relation(F.elements, [[F.le(x, y) for y in range(F.size)] for x in range(F.size)], F.name)
    assert G.meet == F.meet and G.join == F.join and G.top == F.top and G.bottom == F.bottom
    return F


def product_frame(A: FinFrame, B: FinFrame, name: str = "") -> FinFrame:
    els = tuple((a, b) for a in A.elements for b in B.elements)
    ai, bi = A.index, B.index
    return frame_from_order(els, lambda x, y: A.le(ai[x[0]], ai[y[0]]) and B.le(bi[x[1]], bi[y[1]]),
                            name or f"{A.name}×{B.name}")


# ---------------------------------------------------------------- homomorphisms

@dataclass(frozen=True, eq=False)
class FrameHom:
    """A frame homomorphism, stored as a tuple of target indices."""

    source: FinFrame
    target: FinFrame
    map: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.map[x]

    def as_labels(self) -> dict:
        return {self.source.label(x): self.target.label(y) for x, y in enumerate(self.map)}


def hom_violation(source: FinFrame, target: FinFrame, m: Sequence[int]):
    """First failure of the frame-homomorphism laws, or None."""
    if m[source.top] != target.top:
        return {"law": "top"}
    if m[source.bottom] != target.bottom:
        return {"law": "bottom"}
    n = source.size
    for x in range(n):
        for y in range(x + 1, n):
            if m[source.meet[x][y]] != target.meet[m[x]][m[y]]:
                return {"law": "meet", "pair": [source.label(x), source.label(y)]}
            if m[source.join[x][y]] != target.join[m[x]][m[y]]:
                return {"law": "join", "pair": [source.label(x), source.label(y)]}
    return None


def frame_hom(source: FinFrame, target: FinFrame, mapping) -> FrameHom:
    """Build a validated hom from a label dict or an index sequence."""
    if isinstance(mapping, Mapping):
        try:
            m = tuple(target.el(mapping[e]) for e in source.elements)
        except KeyError as e:
            raise NotAHom(f"no image for {e.args[0]!r}", {"missing": label_str(e.args[0])}) from None
    else:
        m = tuple(mapping)
    return validate_frame_hom(FrameHom(source, target, m))


def validate_frame_hom(h: FrameHom) -> FrameHom:
    if len(h.map) != h.source.size or any(not 0 <= y < h.target.size for y in h.map):
        raise NotAHom("map has the wrong shape", {"law": "shape"})
    w = hom_violation(h.source, h.target, h.map)
    if w:
        raise NotAHom(f"{w['law']} not preserved", w)
    return h


def identity_hom(F: FinFrame) -> FrameHom:
    return FrameHom(F, F, tuple(range(F.size)))


def compose_homs(k: FrameHom, h: FrameHom) -> FrameHom:
    """k∘h."""
    return FrameHom(h.source, k.target, tuple(k.map[y] for y in h.map))


def left_adjoint(h: FrameHom) -> tuple[int, ...]:
    """l(U) = ⋀{V : U ≤ h(V)}; raises NoLeftAdjoint if l ⊣ h fails."""
    K, L = h.source, h.target
    out = []
    for U in range(L.size):
        l = K.meet_all(V for V in range(K.size) if L.le(U, h.map[V]))
        if not L.le(U, h.map[l]):
            raise NoLeftAdjoint("h does not preserve the required meet", {"element": L.label(U)})
        out.append(l)
    return tuple(out)


def right_adjoint(h: FrameHom) -> tuple[int, ...]:
    """r(U) = ⋁{V : h(V) ≤ U}."""
    K, L = h.source, h.target
    return tuple(K.join_all(V for V in range(K.size) if L.le(h.map[V], U)) for U in range(L.size))


@dataclass(frozen=True)
class AdjointPair:
    """lower ⊣ upper between two frames, as index tuples."""

    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def is_galois(self, lower_src: FinFrame, upper_src: FinFrame) -> bool:
        return all(upper_src.le(self.lower[x], y) == lower_src.le(x, self.upper[y])
                   for x in range(lower_src.size) for y in range(upper_src.size))


@dataclass(frozen=True, eq=False)
class OpenFrameHom:
    """A frame hom h: K → L with its left adjoint ∃: L → K satisfying Frobenius."""

    hom: FrameHom
    left: tuple[int, ...]

    @property
    def source(self) -> FinFrame:
        return self.hom.source

    @property
    def target(self) -> FinFrame:
        return self.hom.target

    @property
    def map(self) -> tuple[int, ...]:
        return self.hom.map

    def __call__(self, x: int) -> int:
        return self.hom.map[x]


def open_witnesses(h: FrameHom) -> tuple[dict | None, dict | None]:
    """Failures of the two openness criteria: Frobenius and Heyting preservation."""
    K, L = h.source, h.target
    try:
        ex = left_adjoint(h)
    except NoLeftAdjoint as e:
        frob = {"criterion": "left-adjoint", **(e.witness or {})}
    else:
        frob = None
        for U in range(L.size):
            for V in range(K.size):
                if ex[L.meet[U][h.map[V]]] != K.meet[ex[U]][V]:
                    frob = {"criterion": "frobenius", "U": L.label(U), "V": K.label(V)}
                    break
            if frob:
                break
    heyt = None
    for x in range(K.size):
        for y in range(K.size):
            if h.map[K.heyting(x, y)] != L.heyting(h.map[x], h.map[y]):
                heyt = {"criterion": "heyting", "x": K.label(x), "y": K.label(y)}
                break
        if heyt:
            break
    return frob, heyt


def check_open(h: FrameHom) -> OpenFrameHom:
    """Open frame hom or NotOpen. Both criteria are computed and must agree."""
    from .errors import InternalInconsistency
    frob, heyt = open_witnesses(h)
    if (frob is None) != (heyt is None):
        raise InternalInconsistency("openness criteria disagree", {"frobenius": frob, "heyting": heyt})
    if frob is not None:
        raise NotOpen("not an open frame homomorphism", frob)
    return OpenFrameHom(h, left_adjoint(h))


def is_open(h: FrameHom) -> bool:
    frob, heyt = open_witnesses(h)
    return frob is None and heyt is None


def image_frame(h: FrameHom) -> tuple[FinFrame, FrameHom, tuple[int, ...]]:
    """Image of h as a subframe: (image, corestriction K → image, inclusion indices)."""
    K, L = h.source, h.target
    img = sorted(set(h.map))
    I = frame_from_order([L.elements[y] for y in img], lambda a, b: L.le(L.el(a), L.el(b)),
                         name=f"im({K.name}→{L.name})")
    pos = {y: i for i, y in enumerate(img)}
    return I, FrameHom(K, I, tuple(pos[y] for y in h.map)), tuple(img)


def enumerate_frame_homs(K: FinFrame, L: FinFrame) -> list[FrameHom]:
    """All frame homs K → L, by backtracking along a linear extension of K."""
    order = K.order
    m = [-1] * K.size
    out: list[FrameHom] = []
    tried = 0
    cap = limits.current().maps

    def consistent(x: int) -> bool:
        y = m[x]
        for z in range(K.size):
            if m[z] < 0 or z == x:
                continue
            mz = K.meet[x][z]
            if m[mz] >= 0 and m[mz] != L.meet[y][m[z]]:
                return False
            jz = K.join[x][z]
            if m[jz] >= 0 and m[jz] != L.join[y][m[z]]:
                return False
            if K.le(z, x) and not L.le(m[z], y):
                return False
            if K.le(x, z) and not L.le(y, m[z]):
                return False
        return True

    def go(i: int) -> None:
        nonlocal tried
        if i == len(order):
            if hom_violation(K, L, m) is None:
                out.append(FrameHom(K, L, tuple(m)))
            return
        x = order[i]
        cands = [L.bottom] if x == K.bottom else [L.top] if x == K.top else range(L.size)
        for y in cands:
            tried += 1
            if tried > cap:
                limits.guard(tried, "maps", "frame hom candidates")
            m[x] = y
            if consistent(x):
                go(i + 1)
            m[x] = -1

    go(0)
    return out


def enumerate_open_homs(K: FinFrame, L: FinFrame) -> list[OpenFrameHom]:
    return [OpenFrameHom(h, left_adjoint(h)) for h in enumerate_frame_homs(K, L) if is_open(h)]
