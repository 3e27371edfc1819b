"""Finite categories, functors, sieves, comma categories and the Grothendieck construction.

Objects and arrows are addressed by integer index. Labels are kept alongside for
reporting. A sieve on an object is an ``int`` bitmask over arrow indices.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from . import limits
from .errors import MalformedTables, NotAFunctor, TargetMismatch


def bits(mask: int) -> Iterator[int]:
    """Indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def sieve_key(mask: int) -> tuple:
    """Canonical sort key: size first, then the sorted arrow indices."""
    return (mask.bit_count(), tuple(bits(mask)))


def label_str(x) -> str:
    if isinstance(x, tuple):
        return "(" + ",".join(label_str(y) for y in x) + ")"
    return str(x)


def id_name(obj) -> str:
    return f"id:{label_str(obj)}"


@dataclass(frozen=True, eq=False)
class FinCategory:
    objects: tuple
    arrows: tuple
    src: tuple[int, ...]
    dst: tuple[int, ...]
    ident: tuple[int, ...]
    table: Mapping[tuple[int, int], int]   # (g, f) -> g∘f, for dst f == src g
    name: str = ""

    def __post_init__(self):
        limits.guard(len(self.arrows), "arrows", "category arrows")

    def __repr__(self):
        return f"FinCategory({self.name or '?'}: {len(self.objects)} objects, {len(self.arrows)} arrows)"

    @cached_property
    def obj_index(self) -> dict:
        return {o: i for i, o in enumerate(self.objects)}

    @cached_property
    def arrow_index(self) -> dict:
        return {a: i for i, a in enumerate(self.arrows)}

    def obj(self, label: Hashable) -> int:
        return self.obj_index[label]

    def arrow(self, label: Hashable) -> int:
        return self.arrow_index[label]

    def compose(self, g: int, f: int) -> int:
        """g∘f."""
        try:
            return self.table[(g, f)]
        except KeyError:
            raise ValueError(f"{self.arrows[g]!r} and {self.arrows[f]!r} do not compose") from None

    def is_identity(self, a: int) -> bool:
        return self.ident[self.src[a]] == a

    @cached_property
    def identity_set(self) -> frozenset:
        return frozenset(self.ident)

    @cached_property
    def into(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.objects]
        for a, d in enumerate(self.dst):
            out[d].append(a)
        return tuple(map(tuple, out))

    @cached_property
    def outof(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.objects]
        for a, s in enumerate(self.src):
            out[s].append(a)
        return tuple(map(tuple, out))

    @cached_property
    def _homs(self) -> dict:
        h: dict = {}
        for a in range(len(self.arrows)):
            h.setdefault((self.src[a], self.dst[a]), []).append(a)
        return {k: tuple(v) for k, v in h.items()}

    def hom(self, c: int, d: int) -> tuple[int, ...]:
        return self._homs.get((c, d), ())

    @cached_property
    def precomp(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """For each arrow a, the pairs (k, a∘k) over all k into the source of a."""
        return tuple(
            tuple((k, self.table[(a, k)]) for k in self.into[self.src[a]])
            for a in range(len(self.arrows)))

    @cached_property
    def generated(self) -> tuple[int, ...]:
        """Mask of the principal sieve generated by each arrow."""
        return tuple(mask_of(ak for _, ak in pc) for pc in self.precomp)

    @cached_property
    def maximal(self) -> tuple[int, ...]:
        return tuple(mask_of(arrs) for arrs in self.into)

    def close(self, mask: int) -> int:
        """Smallest sieve containing the given arrows (all sharing a codomain)."""
        out = 0
        gen = self.generated
        for a in bits(mask):
            out |= gen[a]
        return out

    def is_sieve(self, mask: int) -> bool:
        return self.close(mask) == mask

    def pullback(self, mask: int, h: int) -> int:
        """h*(S) = {k : h∘k ∈ S}, a sieve on the source of h."""
        out = 0
        for k, hk in self.precomp[h]:
            if mask >> hk & 1:
                out |= 1 << k
        return out

    @cached_property
    def _sieve_cache(self) -> dict:
        return {}

    def sieve_masks(self, c: int) -> tuple[int, ...]:
        """Every sieve on c, in canonical order (size, then arrow indices)."""
        cache = self._sieve_cache
        if c not in cache:
            cache[c] = tuple(sorted(_enumerate_sieves(self, c), key=sieve_key))
        return cache[c]

    def arrow_labels(self, mask: int) -> list:
        return [self.arrows[a] for a in bits(mask)]


def _enumerate_sieves(C: FinCategory, c: int) -> list[int]:
    arrs = C.into[c]
    gen = C.generated
    # up[a]: arrows b into c with a ∈ gen(b); excluding a forces these out too
    up = {a: mask_of(b for b in arrs if gen[b] >> a & 1) for a in arrs}
    cap = limits.current().sieves
    out: list[int] = []

    def go(i: int, inc: int, exc: int) -> None:
        while i < len(arrs) and ((inc | exc) >> arrs[i] & 1):
            i += 1
        if i == len(arrs):
            out.append(inc)
            if len(out) > cap:
                limits.guard(len(out), "sieves", f"sieves on {label_str(C.objects[c])}")
            return
        a = arrs[i]
        if not (exc & gen[a]):
            go(i + 1, inc | gen[a], exc)
        go(i + 1, inc, exc | up[a])

    go(0, 0, 0)
    return out


@dataclass(frozen=True)
class Sieve:
    """A sieve on ``obj``: a set of arrows with that codomain, closed under precomposition."""

    obj: int
    mask: int

    def __len__(self) -> int:
        return self.mask.bit_count()

    def arrows(self) -> tuple[int, ...]:
        return tuple(bits(self.mask))

    def labels(self, C: FinCategory) -> list:
        return C.arrow_labels(self.mask)


def sieves_on(C: FinCategory, c: int) -> list[Sieve]:
    return [Sieve(c, m) for m in C.sieve_masks(c)]


def generate_sieve(C: FinCategory, c: int, family: Iterable[int]) -> Sieve:
    fam = list(family)
    bad = [C.arrows[a] for a in fam if C.dst[a] != c]
    if bad:
        raise TargetMismatch(f"arrows not into {C.objects[c]!r}", [label_str(b) for b in bad])
    return Sieve(c, C.close(mask_of(fam)))


def pullback_sieve(C: FinCategory, S: Sieve, h: int) -> Sieve:
    if C.dst[h] != S.obj:
        raise TargetMismatch("pullback along an arrow with the wrong codomain",
                             {"arrow": label_str(C.arrows[h])})
    return Sieve(C.src[h], C.pullback(S.mask, h))


# ---------------------------------------------------------------- construction

def validate_category(objects: Sequence, arrows: Sequence[tuple], compose: Mapping,
                      name: str = "") -> FinCategory:
    """Build and check a category from labels.

    ``arrows`` lists non-identity arrows as (label, src, dst). Identities are added as
    ``id:<obj>``; composites with identities are filled in unless given explicitly.
    ``compose`` maps (g, f) label pairs to the label of g∘f.
    """
    violations: list = []
    objects = tuple(objects)
    oi = {o: i for i, o in enumerate(objects)}
    if len(oi) != len(objects):
        violations.append({"kind": "duplicate-object"})
    labels = [id_name(o) for o in objects]
    src = list(range(len(objects)))
    dst = list(range(len(objects)))
    for entry in arrows:
        lab, s, d = entry
        if s not in oi or d not in oi:
            violations.append({"kind": "unknown-object", "arrow": label_str(lab)})
            continue
        labels.append(lab)
        src.append(oi[s])
        dst.append(oi[d])
    ai = {a: i for i, a in enumerate(labels)}
    if len(ai) != len(labels):
        violations.append({"kind": "duplicate-arrow"})
    if violations:
        raise MalformedTables(violations)
    ident = tuple(range(len(objects)))
    table: dict[tuple[int, int], int] = {}
    for (gl, fl), hl in compose.items():
        if gl not in ai or fl not in ai or hl not in ai:
            violations.append({"kind": "unknown-arrow", "pair": [label_str(gl), label_str(fl)]})
            continue
        g, f, h = ai[gl], ai[fl], ai[hl]
        if dst[f] != src[g]:
            violations.append({"kind": "not-composable", "pair": [label_str(gl), label_str(fl)]})
            continue
        table[(g, f)] = h
    for a in range(len(labels)):
        for key, want in (((ident[dst[a]], a), a), ((a, ident[src[a]]), a)):
            if key not in table:
                table[key] = want
            elif table[key] != want:
                violations.append({"kind": "identity", "arrow": label_str(labels[a])})
    C = FinCategory(objects, tuple(labels), tuple(src), tuple(dst), ident, table, name)
    violations.extend(category_violations(C))
    if violations:
        raise MalformedTables(violations)
    return C


def category_violations(C: FinCategory) -> list:
    """Missing/ill-typed composites and associativity failures."""
    out: list = []
    n = len(C.arrows)
    for g in range(n):
        for f in C.into[C.src[g]]:
            h = C.table.get((g, f))
            if h is None:
                out.append({"kind": "missing", "pair": [label_str(C.arrows[g]), label_str(C.arrows[f])]})
            elif C.src[h] != C.src[f] or C.dst[h] != C.dst[g]:
                out.append({"kind": "typing", "pair": [label_str(C.arrows[g]), label_str(C.arrows[f])]})
    if out:
        return out
    for (g, f), gf in C.table.items():
        for h in C.outof[C.dst[g]]:
            if C.table[(h, gf)] != C.table[(C.table[(h, g)], f)]:
                out.append({"kind": "associativity",
                            "triple": [label_str(C.arrows[x]) for x in (h, g, f)]})
    return out


def from_tables(objects, arrows, src, dst, ident, table, name: str = "", check: bool = False) -> FinCategory:
    """Fast constructor for programmatically built categories."""
    C = FinCategory(tuple(objects), tuple(arrows), tuple(src), tuple(dst), tuple(ident), table, name)
    if check:
        v = category_violations(C)
        if v:
            raise MalformedTables(v)
    return C


def terminal_category() -> FinCategory:
    return validate_category(["*"], [], {}, name="1")


def find_terminal(C: FinCategory) -> int | None:
    for t in range(len(C.objects)):
        if all(len(C.hom(c, t)) == 1 for c in range(len(C.objects))):
            return t
    return None


def opposite_free_endos(C: FinCategory) -> bool:
    """True when the only endomorphisms are identities."""
    return all(C.is_identity(a) for a in range(len(C.arrows)) if C.src[a] == C.dst[a])


# ---------------------------------------------------------------- functors

@dataclass(frozen=True, eq=False)
class FinFunctor:
    source: FinCategory
    target: FinCategory
    obj_map: tuple[int, ...]
    arr_map: tuple[int, ...]
    name: str = ""

    def __call__(self, a: int) -> int:
        return self.arr_map[a]

    def on_obj(self, c: int) -> int:
        return self.obj_map[c]

    def image_mask(self, mask: int) -> int:
        return mask_of(self.arr_map[a] for a in bits(mask))

    def image_sieve(self, mask: int) -> int:
        """Sieve generated by the image family."""
        return self.target.close(self.image_mask(mask))


def functor_violations(F: FinFunctor) -> list:
    C, D = F.source, F.target
    out: list = []
    if len(F.obj_map) != len(C.objects) or len(F.arr_map) != len(C.arrows):
        return [{"kind": "arity"}]
    for a in range(len(C.arrows)):
        b = F.arr_map[a]
        if D.src[b] != F.obj_map[C.src[a]] or D.dst[b] != F.obj_map[C.dst[a]]:
            out.append({"kind": "typing", "arrow": label_str(C.arrows[a])})
    if out:
        return out
    for c in range(len(C.objects)):
        if F.arr_map[C.ident[c]] != D.ident[F.obj_map[c]]:
            out.append({"kind": "identity", "object": label_str(C.objects[c])})
    for (g, f), gf in C.table.items():
        if D.table[(F.arr_map[g], F.arr_map[f])] != F.arr_map[gf]:
            out.append({"kind": "composition",
                        "pair": [label_str(C.arrows[g]), label_str(C.arrows[f])]})
    return out


def validate_functor(F: FinFunctor) -> FinFunctor:
    v = functor_violations(F)
    if v:
        raise NotAFunctor(f"{len(v)} functor violation(s)", v)
    return F


def functor_from_labels(source: FinCategory, target: FinCategory, objects: Mapping,
                        arrows: Mapping, name: str = "") -> FinFunctor:
    """Identity arrows may be omitted from ``arrows``; they go to identities."""
    try:
        om = tuple(target.obj(objects[o]) for o in source.objects)
        am = []
        for a, lab in enumerate(source.arrows):
            if lab in arrows:
                am.append(target.arrow(arrows[lab]))
            elif source.is_identity(a):
                am.append(target.ident[om[source.src[a]]])
            else:
                raise KeyError(lab)
    except KeyError as e:
        raise NotAFunctor(f"no image for {e.args[0]!r}", {"missing": label_str(e.args[0])}) from None
    return validate_functor(FinFunctor(source, target, om, tuple(am), name))


def identity_functor(C: FinCategory) -> FinFunctor:
    return FinFunctor(C, C, tuple(range(len(C.objects))), tuple(range(len(C.arrows))), "id")


def compose_functors(G: FinFunctor, F: FinFunctor) -> FinFunctor:
    """G∘F."""
    if F.target is not G.source:
        raise TargetMismatch("functors do not compose")
    return FinFunctor(F.source, G.target,
                      tuple(G.obj_map[x] for x in F.obj_map),
                      tuple(G.arr_map[x] for x in F.arr_map))


# ---------------------------------------------------------------- comma category

@dataclass(frozen=True, eq=False)
class CommaCategory:
    """(1_D ↓ F): objects (c, a: d → F c); arrows (g, h) with F(g)∘a' = a∘h."""

    category: FinCategory
    functor: FinFunctor
    pi_C: FinFunctor
    pi_D: FinFunctor
    i_F: FinFunctor
    objs: tuple[tuple[int, int], ...]


def comma_category(F: FinFunctor) -> CommaCategory:
    C, D = F.source, F.target
    objs = [(c, a) for c in range(len(C.objects)) for a in D.into[F.obj_map[c]]]
    oi = {o: i for i, o in enumerate(objs)}
    arrs: list[tuple[int, int, int, int]] = []   # (src obj, dst obj, g, h)
    for i, (c1, a1) in enumerate(objs):
        for j, (c2, a2) in enumerate(objs):
            for g in C.hom(c1, c2):
                for h in D.hom(D.src[a1], D.src[a2]):
                    if D.table[(F.arr_map[g], a1)] == D.table[(a2, h)]:
                        arrs.append((i, j, g, h))
                        limits.guard(len(arrs), "arrows", "comma category arrows")
    id_list = [(i, i, C.ident[c], D.ident[D.src[a]]) for i, (c, a) in enumerate(objs)]
    idset = set(id_list)
    arrs = id_list + [t for t in arrs if t not in idset]
    ai = {t: k for k, t in enumerate(arrs)}
    ident = tuple(range(len(objs)))
    out_by_obj: list[list[int]] = [[] for _ in objs]
    for k, t in enumerate(arrs):
        out_by_obj[t[0]].append(k)
    table = {}
    for k1, (i, j, g1, h1) in enumerate(arrs):
        for k2 in out_by_obj[j]:
            _, m, g2, h2 = arrs[k2]
            table[(k2, k1)] = ai[(i, m, C.table[(g2, g1)], D.table[(h2, h1)])]
    olab = tuple((C.objects[c], D.arrows[a]) for c, a in objs)
    alab = tuple((C.arrows[g], D.arrows[h], olab[i], olab[j]) for i, j, g, h in arrs)
    K = from_tables(olab, alab, [t[0] for t in arrs], [t[1] for t in arrs], ident, table,
                    name=f"(1↓{F.name or 'F'})")
    piC = FinFunctor(K, C, tuple(c for c, _ in objs), tuple(t[2] for t in arrs), "pi_C")
    piD = FinFunctor(K, D, tuple(D.src[a] for _, a in objs), tuple(t[3] for t in arrs), "pi_D")
    iF = FinFunctor(C, K, tuple(oi[(c, D.ident[F.obj_map[c]])] for c in range(len(C.objects))),
                    tuple(ai[(oi[(C.src[g], D.ident[F.obj_map[C.src[g]]])],
                              oi[(C.dst[g], D.ident[F.obj_map[C.dst[g]]])],
                              g, F.arr_map[g])] for g in range(len(C.arrows))), "i_F")
    return CommaCategory(K, F, piC, piD, iF, tuple(objs))


# ---------------------------------------------------------------- Grothendieck construction

@dataclass(frozen=True, eq=False)
class GrothendieckConstruction:
    """Total category of a poset-valued presheaf, with projection and top section."""

    category: FinCategory
    projection: FinFunctor
    section: FinFunctor
    objs: tuple[tuple[int, int], ...]          # (c, U)
    arrs: tuple[tuple[int, int, int], ...]     # (g, U, V)
    obj_of: Mapping[tuple[int, int], int]
    arr_of: Mapping[tuple[int, int, int], int]


def grothendieck_construction(P) -> GrothendieckConstruction:
    """``P`` supplies ``base``, ``fibres`` (with ``size``, ``le``, ``top``, ``elements``) and
    ``inv``: for each base arrow g: c → d, the map fibre(d) → fibre(c) as a tuple."""
    C = P.base
    objs = [(c, U) for c in range(len(C.objects)) for U in range(P.fibres[c].size)]
    obj_of = {o: i for i, o in enumerate(objs)}
    arrs: list[tuple[int, int, int]] = []
    for g in range(len(C.arrows)):
        Lc, Ld = P.fibres[C.src[g]], P.fibres[C.dst[g]]
        inv = P.inv[g]
        for U in range(Lc.size):
            up = Lc.up[U]
            for V in range(Ld.size):
                if up >> inv[V] & 1:
                    arrs.append((g, U, V))
        limits.guard(len(arrs), "arrows", "Grothendieck construction arrows")
    # identities of C come first in C, so arrows with g = id_c come first already;
    # reorder so that the identity of each object precedes everything else
    ids = [(C.ident[c], U, U) for c, U in objs]
    idset = set(ids)
    arrs = ids + [a for a in arrs if a not in idset]
    arr_of = {a: i for i, a in enumerate(arrs)}
    src = [obj_of[(C.src[g], U)] for g, U, _ in arrs]
    dst = [obj_of[(C.dst[g], V)] for g, _, V in arrs]
    out_by_obj: list[list[int]] = [[] for _ in objs]
    for i, s in enumerate(src):
        out_by_obj[s].append(i)
    table = {}
    for i, (g, U, V) in enumerate(arrs):
        for j in out_by_obj[dst[i]]:
            h, _, W = arrs[j]
            table[(j, i)] = arr_of[(C.table[(h, g)], U, W)]
    olab = tuple((C.objects[c], P.fibres[c].elements[U]) for c, U in objs)
    alab = tuple((C.arrows[g], P.fibres[C.src[g]].elements[U], P.fibres[C.dst[g]].elements[V])
                 for g, U, V in arrs)
    T = from_tables(olab, alab, src, dst, list(range(len(objs))), table, name="C⋊P")
    proj = FinFunctor(T, C, tuple(c for c, _ in objs), tuple(g for g, _, _ in arrs), "p")
    sec = FinFunctor(C, T, tuple(obj_of[(c, P.fibres[c].top)] for c in range(len(C.objects))),
                     tuple(arr_of[(g, P.fibres[C.src[g]].top, P.fibres[C.dst[g]].top)]
                           for g in range(len(C.arrows))), "t")
    return GrothendieckConstruction(T, proj, sec, tuple(objs), tuple(arrs), obj_of, arr_of)
