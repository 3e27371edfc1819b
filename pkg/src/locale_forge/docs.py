"""JSON documents and DOT export.

References (``<ref>``) are either inline documents or paths, resolved relative to the
document that mentions them.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import MalformedInput, UnsupportedDocument
from .fincat import FinCategory, FinFunctor, bits, functor_from_labels, label_str, mask_of, validate_category
from .frame import FinFrame, validate_frame
from .intloc import IntLocalePresentation, validate_presentation
from .sites import Topology, trivial_topology, validate_topology

SCHEMA = "1"


def load(path: str | Path) -> tuple[Any, Path]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise MalformedInput(f"cannot read {p}: {e.strerror}", {"path": str(p)}) from None
    try:
        return json.loads(text), p.resolve().parent
    except json.JSONDecodeError as e:
        raise MalformedInput(f"{p}: invalid JSON ({e.msg}, line {e.lineno})", {"path": str(p)}) from None


def resolve(ref: Any, base: Path) -> tuple[Any, Path]:
    if isinstance(ref, str):
        return load(base / ref)
    if isinstance(ref, dict):
        return ref, base
    raise MalformedInput("expected a document or a path", {})


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _need(doc: Any, *keys: str) -> None:
    if not isinstance(doc, dict):
        raise MalformedInput("document must be a JSON object", {})
    missing = [k for k in keys if k not in doc]
    if missing:
        raise MalformedInput(f"missing field(s): {', '.join(missing)}", {"fields": missing})


# ---------------------------------------------------------------- categories

def _split_pair(key: str, names: set) -> tuple[str, str]:
    hits = [(key[:i], key[i + 1:]) for i, ch in enumerate(key) if ch == "." and key[:i] in names
            and key[i + 1:] in names]
    if len(hits) != 1:
        raise MalformedInput(f"cannot read composite key {key!r}", {"key": key})
    return hits[0]


def category_from_doc(doc: Any, name: str = "") -> FinCategory:
    _need(doc, "objects", "arrows")
    arrows = []
    for a in doc["arrows"]:
        if not isinstance(a, dict) or not {"name", "src", "dst"} <= a.keys():
            raise MalformedInput("arrows need name, src and dst", {"arrow": a})
        arrows.append((a["name"], a["src"], a["dst"]))
    names = {a[0] for a in arrows} | {f"id:{o}" for o in doc["objects"]}
    comp = {}
    raw = doc.get("compose", {})
    items = raw.items() if isinstance(raw, dict) else (((f"{g}.{f}", h) for g, f, h in raw))
    for key, h in items:
        comp[_split_pair(key, names)] = h
    return validate_category(doc["objects"], arrows, comp, name=doc.get("name", name))


def category_to_doc(C: FinCategory) -> dict:
    non_id = [a for a in range(len(C.arrows)) if not C.is_identity(a)]
    comp = {}
    for g in non_id:
        for f in non_id:
            if C.dst[f] == C.src[g]:
                comp[f"{label_str(C.arrows[g])}.{label_str(C.arrows[f])}"] = label_str(C.arrows[C.compose(g, f)])
    doc = {"objects": [label_str(o) for o in C.objects],
           "arrows": [{"name": label_str(C.arrows[a]), "src": label_str(C.objects[C.src[a]]),
                       "dst": label_str(C.objects[C.dst[a]])} for a in non_id]}
    if comp:
        doc["compose"] = comp
    if C.name:
        doc["name"] = C.name
    return doc


# ---------------------------------------------------------------- frames

def frame_from_doc(doc: Any, name: str = "") -> FinFrame:
    _need(doc, "elements")
    return validate_frame(doc["elements"], [tuple(p) for p in doc.get("leq", [])], doc.get("name", name))


def hasse(F: FinFrame) -> list[tuple[int, int]]:
    out = []
    for x in range(F.size):
        for y in bits(F.up[x]):
            if y != x and not any(z not in (x, y) and F.le(z, y) for z in bits(F.up[x])):
                out.append((x, y))
    return out


def frame_to_doc(F: FinFrame) -> dict:
    doc = {"elements": [F.label(x) for x in range(F.size)],
           "leq": [[F.label(x), F.label(y)] for x, y in hasse(F)]}
    if F.name:
        doc["name"] = F.name
    return doc


# ---------------------------------------------------------------- topologies and functors

def topology_from_doc(C: FinCategory, doc: Any) -> Topology:
    if doc == "trivial" or doc is None:
        return trivial_topology(C)
    _need(doc, "covers")
    covers = {}
    for c, sieves in doc["covers"].items():
        try:
            covers[c] = [mask_of(C.arrow(a) for a in s) for s in sieves]
        except KeyError as e:
            raise MalformedInput(f"unknown arrow or object {e.args[0]!r}", {"object": c}) from None
    return validate_topology(C, covers)


def topology_to_doc(T: Topology) -> dict:
    C = T.cat
    return {"covers": {label_str(C.objects[c]): [[label_str(a) for a in C.arrow_labels(m)] for m in T.covers_on(c)]
                       for c in range(len(C.objects))}}


def functor_from_doc(doc: Any, base: Path) -> FinFunctor:
    _need(doc, "source", "target", "objects", "arrows")
    C = category_from_doc(*_deref(doc["source"], base))
    D = category_from_doc(*_deref(doc["target"], base))
    return functor_from_labels(C, D, doc["objects"], doc["arrows"], name=doc.get("name", "F"))


def _deref(ref: Any, base: Path) -> tuple[Any, str]:
    d, _ = resolve(ref, base)
    return d, ref if isinstance(ref, str) else ""


# ---------------------------------------------------------------- presentations

def presentation_from_doc(doc: Any, base: Path = Path("."), name: str = "") -> IntLocalePresentation:
    _need(doc, "base", "fibres")
    bdoc, bpath = resolve(doc["base"], base)
    C = category_from_doc(bdoc)
    fibres = {}
    for o in C.objects:
        if o not in doc["fibres"]:
            raise MalformedInput(f"no fibre for object {o!r}", {"object": label_str(o)})
        fd, _ = resolve(doc["fibres"][o], bpath)
        fibres[o] = frame_from_doc(fd, name=str(o))
    return validate_presentation(C, fibres, doc.get("transitions", {}), name=doc.get("name", name))


def presentation_to_doc(P: IntLocalePresentation) -> dict:
    B = P.base
    trans = {}
    for g in range(len(B.arrows)):
        if B.is_identity(g):
            continue
        c, d = B.src[g], B.dst[g]
        trans[label_str(B.arrows[g])] = {P.fibres[d].label(v): P.fibres[c].label(P.inv[g][v])
                                         for v in range(P.fibres[d].size)}
    doc = {"base": category_to_doc(B),
           "fibres": {label_str(o): frame_to_doc(P.fibres[c]) for c, o in enumerate(B.objects)},
           "transitions": trans}
    if P.name:
        doc["name"] = P.name
    return doc


def _presentation_ref(ref: Any, base: Path) -> IntLocalePresentation:
    d, b = resolve(ref, base)
    return presentation_from_doc(d, b, name=ref if isinstance(ref, str) else "")


def morphism_from_doc(doc: Any, base: Path = Path(".")):
    from .morphism import validate_morphism
    _need(doc, "source", "target", "components")
    L1 = _presentation_ref(doc["source"], base)
    L2 = _presentation_ref(doc["target"], base)
    if L1.base.objects != L2.base.objects or L1.base.arrows != L2.base.arrows:
        from .errors import TargetMismatch
        raise TargetMismatch("source and target live over different base categories")
    comps = {}
    for c, o in enumerate(L1.base.objects):
        m = doc["components"].get(o)
        if m is None:
            raise MalformedInput(f"no component at {o!r}", {"object": label_str(o)})
        try:
            comps[c] = tuple(L1.fibres[c].el(m[x]) for x in L2.fibres[c].elements)
        except KeyError as e:
            raise MalformedInput("component incomplete or mentions unknown elements",
                                 {"object": label_str(o), "element": label_str(e.args[0])}) from None
    return validate_morphism(L1, L2, [comps[c] for c in range(len(L1.base.objects))])


def morphism_to_doc(f) -> dict:
    return {"source": presentation_to_doc(f.source), "target": presentation_to_doc(f.target),
            "components": f.labels()}


def nucleus_from_doc(doc: Any, base: Path = Path("."), pre: bool = False):
    from .nuclei import validate_internal_nucleus, validate_internal_prenucleus
    _need(doc, "presentation", "components")
    P = _presentation_ref(doc["presentation"], base)
    comps = {}
    for c, o in enumerate(P.base.objects):
        m = doc["components"].get(o)
        if m is None:
            raise MalformedInput(f"no component at {o!r}", {"object": label_str(o)})
        comps[o] = m
    return (validate_internal_prenucleus if pre else validate_internal_nucleus)(P, comps)


def nucleus_components_doc(j) -> dict:
    P = j.presentation
    return {label_str(o): {P.fibres[c].label(x): P.fibres[c].label(y) for x, y in enumerate(j.components[c])}
            for c, o in enumerate(P.base.objects)}


def detect_kind(doc: Any) -> str:
    if not isinstance(doc, dict):
        raise UnsupportedDocument("document must be a JSON object")
    keys = doc.keys()
    if {"source", "target", "components"} <= keys:
        return "morphism"
    if {"presentation", "components"} <= keys:
        return "nucleus"
    if {"presentation", "topology"} <= keys:
        return "sheaf-check"
    if {"parts", "middle", "embeddings"} <= keys:
        return "glue"
    if {"elements", "frame", "action"} <= keys:
        return "monoid-action"
    if "functor" in keys:
        return "site-map"
    if {"base", "fibres"} <= keys:
        return "presentation"
    if {"source", "target", "objects", "arrows"} <= keys:
        return "functor"
    if {"objects", "arrows"} <= keys:
        return "category"
    if "elements" in keys:
        return "frame"
    if "frame" in keys and isinstance(doc["frame"], dict):
        return "nuclei-frame"
    raise UnsupportedDocument("unrecognised document", {"keys": sorted(keys)})


# ---------------------------------------------------------------- DOT

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def frame_dot(F: FinFrame, name: str = "frame") -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=BT;"]
    lines += [f"  {_q(F.label(x))};" for x in range(F.size)]
    lines += [f"  {_q(F.label(x))} -> {_q(F.label(y))};" for x, y in hasse(F)]
    return "\n".join(lines) + "\n}\n"


def category_dot(C: FinCategory, name: str = "category") -> str:
    lines = [f"digraph {_q(name)} {{"]
    lines += [f"  {_q(label_str(o))};" for o in C.objects]
    for a in range(len(C.arrows)):
        if not C.is_identity(a):
            lines.append(f"  {_q(label_str(C.objects[C.src[a]]))} -> {_q(label_str(C.objects[C.dst[a]]))}"
                         f" [label={_q(label_str(C.arrows[a]))}];")
    return "\n".join(lines) + "\n}\n"


def export_dot(doc: Any) -> str:
    kind = detect_kind(doc)
    if kind == "category":
        C = category_from_doc(doc)
        return category_dot(C, C.name or "category")
    if kind == "frame":
        F = frame_from_doc(doc)
        return frame_dot(F, F.name or "frame")
    if kind == "nuclei-frame":
        return frame_dot(frame_from_doc(doc["frame"]), "N")
    raise UnsupportedDocument(f"cannot draw a {kind} document", {"kind": kind})

