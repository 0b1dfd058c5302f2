"""Site-bundle documents: a JSON format for categories, topologies, indexed
categories, functors, natural transformations and presheaves.

Topology entries store generator families, never saturated cover sets;
saturation is recomputed on load.  Composition tables may be sparse: the
composites forced by the identity field are filled in, anything else left
undefined is a located validation error.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .fincat import (
    FinCategory,
    FinFunctor,
    NatTransform,
    StructureError,
    validate_category,
    validate_functor,
    validate_transform,
)
from .fibration import IndexedCategory, validate_indexed
from .presheaf import Presheaf, validate_presheaf
from .sieves import Topology, make_coverage, saturate


class BundleError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__("{}: {}".format(path, message))
        self.path = path
        self.reason = message


@dataclass
class Workspace:
    categories: dict[str, FinCategory] = field(default_factory=dict)
    topologies: dict[str, Topology] = field(default_factory=dict)
    indexed: dict[str, IndexedCategory] = field(default_factory=dict)
    functors: dict[str, FinFunctor] = field(default_factory=dict)
    naturals: dict[str, NatTransform] = field(default_factory=dict)
    presheaves: dict[str, Presheaf] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Workspace):
            return NotImplemented
        return (
            self.categories == other.categories
            and self.topologies == other.topologies
            and {k: (v.base, v.fiber, v.restriction.keys()) for k, v in self.indexed.items()}
            == {k: (v.base, v.fiber, v.restriction.keys()) for k, v in other.indexed.items()}
            and self.functors == other.functors
            and self.naturals == other.naturals
            and self.presheaves == other.presheaves
        )


def _need(mapping, key, path, kind):
    if key not in mapping:
        raise BundleError(path, "dangling reference to {} {!r}".format(kind, key))
    return mapping[key]


def load_category(name: str, doc: dict) -> FinCategory:
    path = "categories/{}".format(name)
    try:
        objects = list(doc["objects"])
        arrows = {a: tuple(st) for a, st in doc.get("arrows", {}).items()}
        identity = dict(doc.get("identity", {}))
    except (TypeError, KeyError) as err:
        raise BundleError(path, "malformed tables: {}".format(err))
    for c in objects:
        if c not in identity:
            auto = "id_{}".format(c)
            identity[c] = auto
            arrows.setdefault(auto, (c, c))
    table = {}
    for i, entry in enumerate(doc.get("compose", [])):
        if len(entry) != 3:
            raise BundleError("{}/compose/{}".format(path, i), "entries are [after, first, result]")
        g, f, h = entry
        table[(g, f)] = h
    for a, st in arrows.items():
        if len(st) != 2:
            raise BundleError("{}/arrows/{}".format(path, a), "endpoints must be [src, tgt]")
        s, t = st
        if s in identity and identity[s] in arrows:
            table.setdefault((a, identity[s]), a)
        if t in identity and identity[t] in arrows:
            table.setdefault((identity[t], a), a)
    try:
        return validate_category(objects, arrows, identity, table)
    except StructureError as err:
        raise BundleError(path, str(err))


def load_bundle(source) -> Workspace:
    """Load and validate a bundle from a path, JSON text or parsed dict.

    Every cross-reference must resolve and every structure passes its
    module validator; errors carry the offending entry's path.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = source
        if hasattr(source, "read"):
            text = source.read()
        elif "\n" not in str(source) and not str(source).lstrip().startswith("{"):
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise BundleError("/", "parse error: {}".format(err))
    ws = Workspace()
    for name in sorted(doc.get("categories", {})):
        ws.categories[name] = load_category(name, doc["categories"][name])
    for name in sorted(doc.get("functors", {})):
        entry = doc["functors"][name]
        path = "functors/{}".format(name)
        src = _need(ws.categories, entry.get("source"), path, "category")
        tgt = _need(ws.categories, entry.get("target"), path, "category")
        arr = dict(entry.get("arrows", {}))
        for c, i in src.identity.items():
            if entry.get("objects", {}).get(c) is not None:
                arr.setdefault(i, tgt.identity[entry["objects"][c]])
        try:
            ws.functors[name] = validate_functor(entry.get("objects", {}), arr, src, tgt)
        except StructureError as err:
            raise BundleError(path, str(err))
    for name in sorted(doc.get("topologies", {})):
        entry = doc["topologies"][name]
        path = "topologies/{}".format(name)
        cat = _need(ws.categories, entry.get("category"), path, "category")
        try:
            cov = make_coverage(cat, {c: [list(f) for f in fams] for c, fams in entry.get("covers", {}).items()})
            ws.topologies[name] = saturate(cov)
        except StructureError as err:
            raise BundleError(path, str(err))
    for name in sorted(doc.get("indexed", {})):
        entry = doc["indexed"][name]
        path = "indexed/{}".format(name)
        base = _need(ws.categories, entry.get("base"), path, "category")
        fibers = {}
        for c, ref in entry.get("fibers", {}).items():
            fibers[c] = _need(ws.categories, ref, "{}/fibers/{}".format(path, c), "category")
        restriction = {}
        for f, ref in entry.get("restrictions", {}).items():
            restriction[f] = _need(ws.functors, ref, "{}/restrictions/{}".format(path, f), "functor")
        try:
            ws.indexed[name] = validate_indexed(base, fibers, restriction)
        except StructureError as err:
            raise BundleError(path, str(err))
    for name in sorted(doc.get("naturals", {})):
        entry = doc["naturals"][name]
        path = "naturals/{}".format(name)
        src = _need(ws.functors, entry.get("source"), path, "functor")
        tgt = _need(ws.functors, entry.get("target"), path, "functor")
        try:
            ws.naturals[name] = validate_transform(entry.get("components", {}), src, tgt)
        except StructureError as err:
            raise BundleError(path, str(err))
    for name in sorted(doc.get("presheaves", {})):
        entry = doc["presheaves"][name]
        path = "presheaves/{}".format(name)
        cat = _need(ws.categories, entry.get("category"), path, "category")
        try:
            ws.presheaves[name] = validate_presheaf(
                cat, entry.get("values", {}), {f: dict(m) for f, m in entry.get("actions", {}).items()}
            )
        except StructureError as err:
            raise BundleError(path, str(err))
    return ws


def category_to_json(cat: FinCategory) -> dict:
    non_unit = {}
    for (g, f), h in sorted(cat.table.items()):
        if cat.is_identity(g) or cat.is_identity(f):
            continue
        non_unit.setdefault((g, f), h)
    return {
        "objects": list(cat.objects),
        "arrows": {a: [cat.src[a], cat.tgt[a]] for a in cat.arrows},
        "identity": dict(sorted(cat.identity.items())),
        "compose": [[g, f, h] for (g, f), h in sorted(non_unit.items())],
    }


def topology_to_json(top: Topology, category_name: str) -> dict:
    """Emit a small generating set: the inclusion-minimal covers per object
    (the maximal sieve is implied and omitted when derivable)."""
    from .sieves import maximal_sieve

    covers = {}
    for c in top.base.objects:
        sieves = top.covers[c]
        minimal = [s for s in sieves if not any(t < s for t in sieves)]
        if minimal == [maximal_sieve(top.base, c).arrows] and len(sieves) == 1:
            minimal = []
        covers[c] = [sorted(s) for s in sorted(minimal, key=lambda s: (len(s), tuple(sorted(s))))]
    return {"category": category_name, "covers": covers}


def functor_to_json(fn: FinFunctor, source_name: str, target_name: str) -> dict:
    return {
        "source": source_name,
        "target": target_name,
        "objects": dict(sorted(fn.obj_map.items())),
        "arrows": dict(sorted(fn.arr_map.items())),
    }


def presheaf_to_json(p: Presheaf, category_name: str) -> dict:
    return {
        "category": category_name,
        "values": {c: list(p.values[c]) for c in p.base.objects},
        "actions": {f: dict(sorted(p.action[f].items())) for f in p.base.arrows},
    }


def workspace_to_json(ws: Workspace) -> dict:
    """Serialize a workspace; inverse to load_bundle up to saturation."""
    cat_names = {}
    doc: dict = {"categories": {}, "topologies": {}, "indexed": {}, "functors": {}, "naturals": {}, "presheaves": {}}
    for name in sorted(ws.categories):
        cat_names[ws.categories[name]] = name
        doc["categories"][name] = category_to_json(ws.categories[name])
    fun_names = {}
    for name in sorted(ws.functors):
        fn = ws.functors[name]
        doc["functors"][name] = functor_to_json(fn, cat_names[fn.source], cat_names[fn.target])
        fun_names[(fn.source, fn.target, tuple(sorted(fn.obj_map.items())), tuple(sorted(fn.arr_map.items())))] = name
    for name in sorted(ws.topologies):
        top = ws.topologies[name]
        doc["topologies"][name] = topology_to_json(top, cat_names[top.base])
    for name in sorted(ws.indexed):
        cix = ws.indexed[name]
        entry = {
            "base": cat_names[cix.base],
            "fibers": {c: cat_names[cix.fiber[c]] for c in cix.base.objects},
            "restrictions": {},
        }
        for f in cix.base.arrows:
            if cix.base.is_identity(f):
                continue
            fn = cix.restriction[f]
            key = (fn.source, fn.target, tuple(sorted(fn.obj_map.items())), tuple(sorted(fn.arr_map.items())))
            entry["restrictions"][f] = fun_names[key]
        doc["indexed"][name] = entry
    for name in sorted(ws.naturals):
        nt = ws.naturals[name]
        src_key = (nt.source.source, nt.source.target, tuple(sorted(nt.source.obj_map.items())), tuple(sorted(nt.source.arr_map.items())))
        tgt_key = (nt.target.source, nt.target.target, tuple(sorted(nt.target.obj_map.items())), tuple(sorted(nt.target.arr_map.items())))
        doc["naturals"][name] = {
            "source": fun_names[src_key],
            "target": fun_names[tgt_key],
            "components": dict(sorted(nt.component.items())),
        }
    for name in sorted(ws.presheaves):
        p = ws.presheaves[name]
        doc["presheaves"][name] = presheaf_to_json(p, cat_names[p.base])
    return doc


def save_bundle(ws: Workspace, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(workspace_to_json(ws), fh, indent=1, sort_keys=True)
        fh.write("\n")


def dumps_canonical(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
