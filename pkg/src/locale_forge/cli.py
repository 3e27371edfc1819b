"""Command-line front end: one subcommand per check or construction, JSON reports on stdout."""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import docs, gen, limits
from .errors import BudgetExceeded, LocaleForgeError, MalformedInput, NoLeftAdjoint, NotANucleus, NotOpen
from .fincat import identity_functor, label_str
from .verdict import Verdict

EXIT = {"pass": 0, "fail": 1, "inapplicable": 1, "budget-exceeded": 3}


@dataclass
class Report:
    command: str
    verdict: Verdict
    artifacts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"schema": docs.SCHEMA, "command": self.command}
        out.update(self.verdict.to_json())
        if self.artifacts:
            out["artifacts"] = self.artifacts
        return out

    def to_text(self) -> str:
        v = self.verdict
        lines = [f"{self.command}: {v.status}"]
        lines += [f"  witness: {docs.json.dumps(w, ensure_ascii=False)}" for w in v.witnesses]
        lines += [f"  {k}: {docs.json.dumps(x, ensure_ascii=False)}" for k, x in v.details.items()]
        lines += [f"  artifact {k}" for k in self.artifacts]
        return "\n".join(lines) + "\n"


def _load(path: str):
    return docs.load(path)


def _presentation(path: str):
    d, b = _load(path)
    return docs.presentation_from_doc(d, b, name=Path(path).stem)


def _morphism(path: str):
    d, b = _load(path)
    return docs.morphism_from_doc(d, b)


def _write(args, name: str, text: str, artifacts: dict) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text, encoding="utf-8")
        artifacts.setdefault("written", []).append(name)


# ---------------------------------------------------------------- handlers

def cmd_validate(args) -> Report:
    d, b = _load(args.input)
    kind = docs.detect_kind(d)
    parse = {"category": lambda: docs.category_from_doc(d),
             "frame": lambda: docs.frame_from_doc(d),
             "presentation": lambda: docs.presentation_from_doc(d, b),
             "morphism": lambda: docs.morphism_from_doc(d, b),
             "nucleus": lambda: docs.nucleus_from_doc(d, b),
             "functor": lambda: docs.functor_from_doc(d, b),
             "site-map": lambda: _site_map_inputs(d, b),
             "sheaf-check": lambda: _sheaf_inputs(d, b),
             "glue": lambda: _glue_inputs(d, b),
             "monoid-action": lambda: _monoid_inputs(d, b)}.get(kind)
    if parse is None:
        from .errors import UnsupportedDocument
        raise UnsupportedDocument(f"cannot validate a {kind} document")
    try:
        parse()
    except NotANucleus:
        if kind != "nucleus":
            raise
        docs.nucleus_from_doc(d, b, pre=True)
        kind = "pre-nucleus"
    return Report("validate", Verdict(True, [], {"kind": kind}))


def cmd_check_rbc(args) -> Report:
    from .intloc import check_relative_BC
    return Report("check-rbc", check_relative_BC(_presentation(args.input)))


def cmd_check_bc_pullbacks(args) -> Report:
    from .intloc import check_BC_pullbacks
    return Report("check-bc-pullbacks", check_BC_pullbacks(_presentation(args.input)))


def _site_map(path: str):
    return _site_map_inputs(*_load(path))


def _site_map_inputs(d, b):
    docs._need(d, "functor")
    fd, fb = docs.resolve(d["functor"], b)
    F = docs.functor_from_doc(fd, fb)
    J = docs.topology_from_doc(F.source, d.get("source_topology"))
    K = docs.topology_from_doc(F.target, d.get("target_topology"))
    return F, J, K


def cmd_check_site_morphism(args) -> Report:
    from .sites import check_morphism_of_sites
    return Report("check-site-morphism", check_morphism_of_sites(*_site_map(args.input)))


def cmd_check_comorphism(args) -> Report:
    from .sites import check_comorphism
    return Report("check-comorphism", check_comorphism(*_site_map(args.input)))


def cmd_check_sheaf(args) -> Report:
    from .intloc import check_sheaf_internal
    return Report("check-sheaf", check_sheaf_internal(*_sheaf_inputs(*_load(args.input))))


def _sheaf_inputs(d, b):
    docs._need(d, "presentation")
    pd, pb = docs.resolve(d["presentation"], b)
    P = docs.presentation_from_doc(pd, pb)
    return P, docs.topology_from_doc(P.base, d.get("topology"))


def cmd_omega(args) -> Report:
    from .intloc import omega_presentation
    d, _ = _load(args.input)
    C = docs.category_from_doc(d)
    O = omega_presentation(C)
    doc = docs.presentation_to_doc(O)
    art = {"presentation": doc}
    _write(args, "omega.json", docs.dumps(doc), art)
    return Report("omega", Verdict(True, [], {"fibre sizes": {label_str(o): O.fibres[c].size
                                                              for c, o in enumerate(C.objects)}}), art)


def cmd_omega_sheaf(args) -> Report:
    from .intloc import omega_sheaf_of
    _, v = omega_sheaf_of(_presentation(args.input))
    return Report("omega-sheaf", v)


def cmd_glue(args) -> Report:
    from .intloc import glue
    r = glue(*_glue_inputs(*_load(args.input)))
    v = Verdict(r.verdict.ok, r.verdict.witnesses,
                {"disjoint open embeddings": r.verdict.status, "relative BC": r.rbc.status,
                 "rbc witnesses": r.rbc.witnesses, "agree": r.agree})
    art = {"presentation": docs.presentation_to_doc(r.presentation)}
    _write(args, "glued.json", docs.dumps(art["presentation"]), art)
    return Report("glue", v, art)


def _glue_inputs(d, b):
    docs._need(d, "parts", "middle", "embeddings")
    parts = [docs.presentation_from_doc(*docs.resolve(r, b)) for r in d["parts"]]
    middle = docs.frame_from_doc(docs.resolve(d["middle"], b)[0])
    terms = None
    if "terminals" in d:
        terms = [Q.base.obj(t) for Q, t in zip(parts, d["terminals"])]
    return parts, middle, d["embeddings"], terms


def cmd_monoid(args) -> Report:
    r = _monoid_inputs(*_load(args.input))
    v = Verdict(r.divisor.ok, r.divisor.witnesses,
                {"divisor": r.divisor.status, "relative BC": r.rbc.status,
                 "extended divisor": r.extended.status, "agree": r.agree})
    return Report("monoid", v)


def _monoid_inputs(d, b):
    from .intloc import from_monoid_action, monoid_category
    docs._need(d, "elements", "frame", "action")
    names = list(d["elements"])
    mult = {}
    for key, z in d.get("mult", {}).items():
        x, y = docs._split_pair(key, set(names))
        mult[(x, y)] = z
    M = monoid_category(names, mult)
    L = docs.frame_from_doc(docs.resolve(d["frame"], b)[0])
    return from_monoid_action(M, L, dict(d["action"]))


def cmd_morphism_validate(args) -> Report:
    f = _morphism(args.input)
    return Report("morphism-validate", Verdict(True, [], {"components": f.labels()}))


def cmd_surjective(args) -> Report:
    from .morphism import is_surjective
    return Report("surjective", is_surjective(_morphism(args.input)))


def cmd_embedding(args) -> Report:
    from .morphism import is_embedding
    return Report("embedding", is_embedding(_morphism(args.input)))


def cmd_factorize(args) -> Report:
    from .morphism import factorize
    F = factorize(_morphism(args.input))
    art = {"middle": docs.presentation_to_doc(F.middle),
           "surjection": {"components": F.surjection.labels()},
           "embedding": {"components": F.embedding.labels()}}
    _write(args, "middle.json", docs.dumps(art["middle"]), art)
    _write(args, "surjection.json", docs.dumps(docs.morphism_to_doc(F.surjection)), art)
    _write(args, "embedding.json", docs.dumps(docs.morphism_to_doc(F.embedding)), art)
    sizes = {label_str(o): F.middle.fibres[c].size for c, o in enumerate(F.middle.base.objects)}
    return Report("factorize", Verdict(True, [], {"middle fibre sizes": sizes}), art)


def cmd_terminal_omega(args) -> Report:
    from .intloc import require_internal_locale
    from .morphism import terminal_into_omega
    P = _presentation(args.input)
    require_internal_locale(P)
    t = terminal_into_omega(P)
    v = Verdict(t.count == 1, [] if t.count == 1 else [{"count": t.count}],
                {"count": t.count, "from formula": t.from_formula})
    return Report("terminal-omega", v, {"components": t.morphism.labels()})


def cmd_nuclei_enumerate(args) -> Report:
    from .nuclei import enumerate_internal_nuclei
    P = _presentation(args.input)
    ns = enumerate_internal_nuclei(P)
    return Report("nuclei-enumerate", Verdict(True, [], {"count": len(ns)}),
                  {"nuclei": [docs.nucleus_components_doc(j) for j in ns]})


def cmd_nuclei_frame(args) -> Report:
    from .nuclei import nuclei_frame
    P = _presentation(args.input)
    NF = nuclei_frame(P)
    fdoc = docs.frame_to_doc(NF.frame)
    dot = docs.frame_dot(NF.frame, "N")
    art = {"frame": fdoc, "dot": dot}
    _write(args, "nuclei-frame.json", docs.dumps(fdoc), art)
    _write(args, "nuclei-frame.dot", dot, art)
    return Report("nuclei-frame", NF.verdict, art)


def cmd_nucleation(args) -> Report:
    from .nuclei import internal_nucleation
    d, b = _load(args.input)
    p = docs.nucleus_from_doc(d, b, pre=True)
    j = internal_nucleation(p)
    return Report("nucleation", Verdict(True), {"components": docs.nucleus_components_doc(j)})


def cmd_lt_roundtrip(args) -> Report:
    from .intloc import require_internal_locale
    from .nuclei import (enumerate_internal_nuclei, enumerate_lt_topologies, internal_nucleus_from_lt,
                         lt_from_internal_nucleus)
    P = _presentation(args.input)
    require_internal_locale(P)
    ks = enumerate_internal_nuclei(P)
    js = enumerate_lt_topologies(P)
    wit = []
    for k in ks:
        if internal_nucleus_from_lt(P, lt_from_internal_nucleus(P, k)).components != k.components:
            wit.append({"nucleus": docs.nucleus_components_doc(k)})
    for j in js:
        back = lt_from_internal_nucleus(P, internal_nucleus_from_lt(P, j))
        if tuple(back.components) != tuple(j.components):
            wit.append({"lt-candidate": [P.obj_label(x) for x in range(len(j.components))]})
    if len(ks) != len(js):
        wit.append({"counts": [len(ks), len(js)]})
    return Report("lt-roundtrip", Verdict(not wit, wit, {"nuclei": len(ks), "lt topologies": len(js)}))


def cmd_mixing_square(args) -> Report:
    """The square p_{L1}∘f̆ = id∘p_{L2} of a morphism f: L1 → L2, with the trivial
    topology on the base."""
    from .morphism import breve
    from .sites import mixing_square, trivial_topology
    f = _morphism(args.input)
    F, _ = breve(f)
    L1, L2 = f.source, f.target
    A, B = L2.total.projection, L1.total.projection
    G = identity_functor(L1.base)
    A = type(A)(A.source, L1.base, A.obj_map, A.arr_map, A.name)
    B = type(B)(B.source, L1.base, B.obj_map, B.arr_map, B.name)
    iso = [L1.base.ident[A.obj_map[x]] for x in range(len(A.source.objects))]
    T = trivial_topology(L1.base)
    r = mixing_square(A, B, F, G, iso, L2.KL, L1.KL, T, T)
    return Report("mixing-square", r.verdict, {"H objects": len(r.H.source.objects)})


def cmd_export_dot(args) -> Report:
    d, _ = _load(args.input)
    dot = docs.export_dot(d)
    art = {"dot": dot}
    _write(args, Path(args.input).stem + ".dot", dot, art)
    return Report("export-dot", Verdict(True), art)


def cmd_gen(args) -> Report:
    out = Path(args.out or "fixtures")
    out.mkdir(parents=True, exist_ok=True)
    spec = gen.GenSpec(seed=args.seed if args.seed is not None else gen.default_seed())
    names = []
    for name, doc in gen.fixture_documents():
        (out / f"{name}.json").write_text(docs.dumps(doc), encoding="utf-8")
        names.append(name)
    items = gen.gen_presentations(spec, len(gen.corpus_presentations()) + args.count)
    for name, P in items[len(gen.corpus_presentations()):]:
        (out / f"{name}.json").write_text(docs.dumps(docs.presentation_to_doc(P)), encoding="utf-8")
        names.append(name)
    return Report("gen", Verdict(True, [], {"seed": spec.seed}), {"written": names})


COMMANDS: dict[str, tuple[Callable, str]] = {
    "validate": (cmd_validate, "parse and validate any document"),
    "check-rbc": (cmd_check_rbc, "relative Beck-Chevalley condition of a presentation"),
    "check-bc-pullbacks": (cmd_check_bc_pullbacks, "Beck-Chevalley along pullback squares"),
    "check-site-morphism": (cmd_check_site_morphism, "morphism-of-sites conditions of a site map"),
    "check-comorphism": (cmd_check_comorphism, "cover-lifting property of a site map"),
    "check-sheaf": (cmd_check_sheaf, "fibres of a presentation form a sheaf for a base topology"),
    "omega": (cmd_omega, "subobject-classifier presentation of a category"),
    "omega-sheaf": (cmd_omega_sheaf, "the Ω-sheaf of (C⋊L, K_L)"),
    "glue": (cmd_glue, "glue parts along a fresh terminal object"),
    "monoid": (cmd_monoid, "monoid action: divisor condition against relative BC"),
    "morphism-validate": (cmd_morphism_validate, "validate an internal locale morphism"),
    "surjective": (cmd_surjective, "surjectivity of a morphism"),
    "embedding": (cmd_embedding, "embedding test for a morphism"),
    "factorize": (cmd_factorize, "surjection-embedding factorisation"),
    "terminal-omega": (cmd_terminal_omega, "the unique morphism into Ω"),
    "nuclei-enumerate": (cmd_nuclei_enumerate, "all internal nuclei"),
    "nuclei-frame": (cmd_nuclei_frame, "the frame of internal nuclei"),
    "nucleation": (cmd_nucleation, "nucleate an internal pre-nucleus"),
    "lt-roundtrip": (cmd_lt_roundtrip, "nuclei against Lawvere-Tierney topologies, both directions"),
    "mixing-square": (cmd_mixing_square, "comma-site square of a morphism's fibred functor"),
    "export-dot": (cmd_export_dot, "DOT for a category, frame or nuclei-frame report"),
    "gen": (cmd_gen, "write fixture documents to a directory"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget-sieves", type=int, default=None, metavar="N")
    common.add_argument("--budget-maps", type=int, default=None, metavar="N")
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("--oracle", choices=["always", "auto", "never"], default="auto")
    common.add_argument("--out", default=None, help="directory for written artifacts")
    common.add_argument("--timing", action="store_true", help="print elapsed time on stderr")
    p = argparse.ArgumentParser(prog="locale-forge", description="Finite checks for internal locales of presheaf toposes.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_, parents=[common])
        if name == "gen":
            sp.add_argument("--count", type=int, default=0, help="extra random presentations")
            sp.add_argument("--seed", type=int, default=None)
        else:
            sp.add_argument("input")
    return p


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    over: dict[str, Any] = {"oracle": args.oracle}
    if args.budget_sieves is not None:
        over["sieves"] = args.budget_sieves
    if args.budget_maps is not None:
        over["maps"] = args.budget_maps
    handler = COMMANDS[args.command][0]
    t0 = time.perf_counter()
    try:
        with limits.limits(**over):
            rep = handler(args)
    except BudgetExceeded as e:
        rep = Report(args.command, Verdict(None, [e.witness], {}, ["budget"]))
    except (MalformedInput, NotOpen, NoLeftAdjoint) as e:
        print(f"locale-forge: {e.kind}: {e}", file=stderr)
        err = {"schema": docs.SCHEMA, "command": args.command,
               "error": {"kind": e.kind, "message": str(e), "witness": e.witness}}
        stdout.write(docs.dumps(err) if args.format == "json" else f"{args.command}: {e.kind}: {e}\n")
        return 2
    except LocaleForgeError as e:
        rep = Report(args.command, Verdict(False, [{"error": e.kind, "message": str(e), "witness": e.witness}]))
    if args.timing:
        print(f"locale-forge: {args.command} took {time.perf_counter() - t0:.3f}s", file=stderr)
    stdout.write(docs.dumps(rep.to_json()) if args.format == "json" else rep.to_text())
    return EXIT[rep.verdict.status]


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
