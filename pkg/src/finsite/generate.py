"""Seeded random instances for the experiment suite, plus greedy shrinking.

Raw uniform tables almost never satisfy associativity, so categories come
from structured grammars: random posets, free categories on small DAGs and
a library of hand-built shapes.  Every generated structure is re-validated;
generation is deterministic in the seed.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, replace

from .fincat import (
    Adjunction,
    FinCategory,
    FinFunctor,
    StructureError,
    build_category,
    compose_functors,
    free_category,
    full_subcategory,
    identity_functor,
    poset_category,
    terminal_category,
    validate_adjunction,
    validate_functor,
)
from .fibration import IndexedCategory, IndexedMorphism, validate_indexed, validate_indexed_morphism
from .presheaf import Presheaf, validate_presheaf
from .sieves import Topology, induced_image_topology, make_coverage, saturate
from . import corpus


@dataclass(frozen=True)
class Caps:
    """Size caps for generated instances; part of every report's identity."""

    base_objects: int = 4
    base_arrows: int = 12
    fiber_objects: int = 4
    value_size: int = 3
    instances: int = 500
    lattice_limit: int = 64
    enumeration_limit: int = 4000
    sheaf_budget: int = 30000

    def render(self) -> str:
        fields = sorted(self.__dataclass_fields__)
        return ";".join("{}={}".format(k, getattr(self, k)) for k in fields)

    @classmethod
    def parse(cls, text: str) -> "Caps":
        kwargs = {}
        if text:
            for chunk in text.replace(",", ";").split(";"):
                if not chunk.strip():
                    continue
                k, _, v = chunk.partition("=")
                if k.strip() not in cls.__dataclass_fields__:
                    raise ValueError("unknown cap {!r}".format(k.strip()))
                kwargs[k.strip()] = int(v)
        return cls(**kwargs)


class GenerationError(RuntimeError):
    """Caps too small to admit any instance of the requested kind."""


def derive_seed(seed: int, index: int) -> int:
    return (seed * 1_000_003 + index * 7_919 + 12_345) % (2**62)


def _rng(seed: int) -> random.Random:
    return random.Random(seed)


# ---------------------------------------------------------------------------
# Categories


def gen_poset(rng: random.Random, max_objects: int) -> FinCategory:
    n = rng.randint(1, max_objects)
    objs = ["p{}".format(i) for i in range(n)]
    leq = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.45:
                leq.append((objs[i], objs[j]))
    return poset_category(objs, leq)


def gen_free(rng: random.Random, max_objects: int, max_arrows: int):
    """Free category on a random small DAG; returns (category, edge dict)."""
    for _ in range(20):
        n = rng.randint(1, max_objects)
        objs = ["f{}".format(i) for i in range(n)]
        edges = {}
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.4:
                    edges["e{}".format(k)] = (objs[i], objs[j])
                    k += 1
        try:
            cat = free_category(objs, edges, path_cap=max_arrows)
            return cat, edges
        except StructureError:
            continue
    cat = free_category(["f0"], {})
    return cat, {}


_LIBRARY = ("one", "walk2", "retract", "iso2", "chain3")


def gen_library(rng: random.Random) -> FinCategory:
    name = rng.choice(_LIBRARY)
    return {
        "one": corpus.one,
        "walk2": corpus.walk2,
        "retract": corpus.retract,
        "iso2": corpus.iso2,
        "chain3": corpus.chain3,
    }[name]()


def gen_category(rng: random.Random, caps: Caps):
    """Returns (category, kind, meta); kind in {poset, free, library}."""
    roll = rng.random()
    if roll < 0.45:
        return gen_poset(rng, caps.base_objects), "poset", None
    if roll < 0.85:
        cat, edges = gen_free(rng, min(caps.base_objects, 3), caps.base_arrows)
        return cat, "free", edges
    return gen_library(rng), "library", None


# ---------------------------------------------------------------------------
# Topologies and sites


def gen_topology(rng: random.Random, cat: FinCategory) -> Topology:
    generators = {}
    for c in cat.objects:
        if rng.random() < 0.55:
            into = list(cat.into(c))
            k = rng.randint(0, min(2, len(into)))
            fam = rng.sample(sorted(into), k)
            generators[c] = [fam]
    return saturate(make_coverage(cat, generators))


def gen_site(rng: random.Random, caps: Caps):
    cat, kind, meta = gen_category(rng, caps)
    return cat, gen_topology(rng, cat), kind, meta


# ---------------------------------------------------------------------------
# Functors


def all_functors(src: FinCategory, tgt: FinCategory, limit: int = 2000):
    """Enumerate every functor src -> tgt by backtracking (small inputs only)."""
    non_id = [a for a in src.arrows if not src.is_identity(a)]
    out = []

    def arrow_candidates(obj_map, f):
        return tgt.hom(obj_map[src.src[f]], obj_map[src.tgt[f]])

    for objs in itertools.product(tgt.objects, repeat=len(src.objects)):
        obj_map = dict(zip(src.objects, objs))
        assign: dict[str, str] = {}

        def full_map():
            m = {a: assign[a] for a in non_id}
            for c in src.objects:
                m[src.identity[c]] = tgt.identity[obj_map[c]]
            return m

        def consistent():
            m = {}
            for c in src.objects:
                m[src.identity[c]] = tgt.identity[obj_map[c]]
            m.update(assign)
            for (g, f), h in src.table.items():
                if g in m and f in m and h in m:
                    if tgt.compose(m[g], m[f]) != m[h]:
                        return False
            return True

        def go(i):
            if len(out) >= limit:
                return
            if i == len(non_id):
                out.append(FinFunctor(src, tgt, dict(obj_map), full_map()))
                return
            f = non_id[i]
            for cand in arrow_candidates(obj_map, f):
                assign[f] = cand
                if consistent():
                    go(i + 1)
                del assign[f]

        go(0)
        if len(out) >= limit:
            break
    return out


def gen_functor(rng: random.Random, src: FinCategory, tgt: FinCategory) -> FinFunctor | None:
    """One random functor, by randomized backtracking."""
    non_id = [a for a in src.arrows if not src.is_identity(a)]
    objects = list(tgt.objects)
    for _ in range(30):
        obj_map = {c: rng.choice(objects) for c in src.objects}
        assign: dict[str, str] = {}

        def consistent():
            m = {src.identity[c]: tgt.identity[obj_map[c]] for c in src.objects}
            m.update(assign)
            for (g, f), h in src.table.items():
                if g in m and f in m and h in m:
                    if tgt.compose(m[g], m[f]) != m[h]:
                        return False
            return True

        def go(i):
            if i == len(non_id):
                return True
            f = non_id[i]
            cands = list(tgt.hom(obj_map[src.src[f]], obj_map[src.tgt[f]]))
            rng.shuffle(cands)
            for cand in cands:
                assign[f] = cand
                if consistent() and go(i + 1):
                    return True
                del assign[f]
            return False

        if go(0):
            arr_map = {src.identity[c]: tgt.identity[obj_map[c]] for c in src.objects}
            arr_map.update(assign)
            return validate_functor(obj_map, arr_map, src, tgt)
    return None


# ---------------------------------------------------------------------------
# Indexed categories


def _discrete(objs) -> FinCategory:
    return build_category(tuple(objs), {})


def _discrete_functor(src: FinCategory, tgt: FinCategory, obj_map) -> FinFunctor:
    arr_map = {src.identity[c]: tgt.identity[obj_map[c]] for c in src.objects}
    return validate_functor(obj_map, arr_map, src, tgt)


def representable_indexed(base: FinCategory, obj: str) -> IndexedCategory:
    """Discrete fibers hom(c, obj); the total category is the slice over obj."""
    fibers = {c: _discrete(base.hom(c, obj)) for c in base.objects}
    restriction = {}
    for f in base.arrows:
        s, t = base.src[f], base.tgt[f]
        restriction[f] = _discrete_functor(
            fibers[t], fibers[s], {u: base.compose(u, f) for u in base.hom(t, obj)}
        )
    return validate_indexed(base, fibers, restriction)


def coslice_indexed(base: FinCategory) -> IndexedCategory:
    """fiber(c) = the coslice under c; restriction is precomposition."""
    fibers = {}
    datas = {}
    for c in base.objects:
        objs = {"[{}]".format(u): u for u in base.out_of(c)}
        arrows = {}
        compose = {}
        arr_data = {}
        for o1, u in objs.items():
            for o2, v in objs.items():
                for w in base.hom(base.tgt[u], base.tgt[v]):
                    if base.compose(w, u) == v:
                        if base.is_identity(w) and o1 == o2:
                            continue
                        name = "{}@{}->{}".format(w, o1, o2)
                        arrows[name] = (o1, o2)
                        arr_data[name] = w
        full = dict(arrows)
        for (b, (bs, bt)) in list(arrows.items()):
            for (a, (asrc, at)) in list(arrows.items()):
                if at == bs:
                    w = base.compose(arr_data[b], arr_data[a])
                    if base.is_identity(w) and asrc == bt:
                        compose[(b, a)] = "id_" + asrc
                    else:
                        compose[(b, a)] = "{}@{}->{}".format(w, asrc, bt)
        fibers[c] = build_category(tuple(sorted(objs)), full, compose)
        datas[c] = (objs, arr_data)
    restriction = {}
    for f in base.arrows:
        s, t = base.src[f], base.tgt[f]
        objs_t, arr_t = datas[t]
        obj_map = {}
        for o, u in objs_t.items():
            obj_map[o] = "[{}]".format(base.compose(u, f))
        arr_map = {}
        for a in fibers[t].arrows:
            if fibers[t].is_identity(a):
                arr_map[a] = fibers[s].identity[obj_map[fibers[t].src[a]]]
                continue
            w = arr_t[a]
            o1, o2 = fibers[t].src[a], fibers[t].tgt[a]
            m1, m2 = obj_map[o1], obj_map[o2]
            if base.is_identity(w) and m1 == m2:
                arr_map[a] = fibers[s].identity[m1]
            else:
                arr_map[a] = "{}@{}->{}".format(w, m1, m2)
        restriction[f] = validate_functor(obj_map, arr_map, fibers[t], fibers[s])
    return validate_indexed(base, fibers, restriction)


def gen_small_category(rng: random.Random, max_objects: int) -> FinCategory:
    roll = rng.random()
    if roll < 0.5:
        return _discrete(["x{}".format(i) for i in range(rng.randint(1, max_objects))])
    if roll < 0.85:
        return gen_poset(rng, max_objects)
    return corpus.walk2() if rng.random() < 0.5 else corpus.one()


def gen_indexed(rng: random.Random, base: FinCategory, caps: Caps, base_kind: str = "poset", base_meta=None) -> IndexedCategory:
    """Recipes: constant fibers, representable (slice), coslice, or free-base
    fibers with arbitrary restrictions along generating edges."""
    roll = rng.random()
    if base_kind == "free" and base_meta is not None and roll < 0.45:
        edges = base_meta
        fibers = {c: gen_small_category(rng, min(caps.fiber_objects, 3)) for c in base.objects}
        edge_restriction = {}
        ok = True
        for e, (s, t) in edges.items():
            fn = gen_functor(rng, fibers[t], fibers[s])
            if fn is None:
                ok = False
                break
            edge_restriction[e] = fn
        if ok:
            restriction = {}
            for a in base.arrows:
                if base.is_identity(a):
                    continue
                seq = a.split("*")[::-1]
                fn = identity_functor(fibers[base.tgt[a]])
                for e in reversed(seq):
                    fn = compose_functors(edge_restriction[e], fn)
                restriction[a] = fn
            return validate_indexed(base, fibers, restriction)
    if roll < 0.6:
        obj = rng.choice(list(base.objects))
        return representable_indexed(base, obj)
    if roll < 0.8 and sum(len(base.out_of(c)) for c in base.objects) <= 4 * len(base.objects):
        return coslice_indexed(base)
    fiber = gen_small_category(rng, caps.fiber_objects)
    return validate_indexed(base, {c: fiber for c in base.objects}, {
        f: identity_functor(fiber) for f in base.arrows if not base.is_identity(f)
    })


def gen_indexed_morphism(rng: random.Random, cix: IndexedCategory, caps: Caps) -> IndexedMorphism:
    """A strict indexed morphism out of cix: identity, a collapse to the
    terminal fiber, or a searched morphism into a fresh indexed category."""
    base = cix.base
    roll = rng.random()
    if roll < 0.25:
        comps = {c: identity_functor(cix.fiber[c]) for c in base.objects}
        return validate_indexed_morphism(cix, cix, comps)
    if roll < 0.6:
        one_fib = terminal_category()
        target = validate_indexed(
            base,
            {c: one_fib for c in base.objects},
            {f: identity_functor(one_fib) for f in base.arrows if not base.is_identity(f)},
        )
        from .fincat import constant_functor

        comps = {c: constant_functor(cix.fiber[c], one_fib, "*") for c in base.objects}
        return validate_indexed_morphism(cix, target, comps)
    target = gen_indexed(rng, base, caps)
    objs = list(base.objects)
    options = {c: all_functors(cix.fiber[c], target.fiber[c], limit=200) for c in objs}
    assign: dict[str, FinFunctor] = {}

    def consistent():
        from .fincat import functor_equal

        for f in base.arrows:
            s, t = base.src[f], base.tgt[f]
            if s in assign and t in assign:
                lhs = compose_functors(assign[s], cix.restriction[f])
                rhs = compose_functors(target.restriction[f], assign[t])
                if not functor_equal(lhs, rhs):
                    return False
        return True

    def go(i):
        if i == len(objs):
            return True
        c = objs[i]
        cands = list(options[c])
        rng.shuffle(cands)
        for fn in cands:
            assign[c] = fn
            if consistent() and go(i + 1):
                return True
            del assign[c]
        return False

    if options and all(options.values()) and go(0):
        return validate_indexed_morphism(cix, target, dict(assign))
    one_fib = terminal_category()
    target = validate_indexed(
        base,
        {c: one_fib for c in base.objects},
        {f: identity_functor(one_fib) for f in base.arrows if not base.is_identity(f)},
    )
    from .fincat import constant_functor

    comps = {c: constant_functor(cix.fiber[c], one_fib, "*") for c in base.objects}
    return validate_indexed_morphism(cix, target, comps)


# ---------------------------------------------------------------------------
# Cartesian (finite-limit) fibers


def _chain(n: int, tag: str) -> FinCategory:
    assert n <= 10, "single-digit ranks keep lexicographic order = chain order"
    objs = ["{}{}".format(tag, i) for i in range(n)]
    return poset_category(objs, [(objs[i], objs[i + 1]) for i in range(n - 1)])


def _chain_map(rng: random.Random, src_size: int, tgt_size: int, src: FinCategory, tgt: FinCategory) -> FinFunctor:
    """A random monotone top-preserving map of chains (preserves all finite limits).

    Chain objects are assumed listed bottom-to-top, as _chain builds them.
    """
    src_objs, tgt_objs = list(src.objects), list(tgt.objects)
    picks = sorted(rng.randint(0, tgt_size - 1) for _ in range(src_size))
    picks[-1] = tgt_size - 1
    obj_map = {src_objs[i]: tgt_objs[picks[i]] for i in range(src_size)}
    arr_map = {}
    for a in src.arrows:
        x, y = src.src[a], src.tgt[a]
        mx, my = obj_map[x], obj_map[y]
        arr_map[a] = tgt.identity[mx] if mx == my else "{}->{}".format(mx, my)
    return validate_functor(obj_map, arr_map, src, tgt)


def gen_cartesian_indexed(rng: random.Random, base: FinCategory, caps: Caps, base_kind: str = "poset", base_meta=None) -> IndexedCategory:
    """Chain fibers (all finite limits exist) with top-preserving monotone
    restrictions; non-free bases get a constant chain so strictness holds."""
    top = max(1, min(3, caps.fiber_objects))
    if base_kind == "free" and base_meta:
        sizes = {c: rng.randint(1, top) for c in base.objects}
        fibers = {c: _chain(sizes[c], "v") for c in base.objects}
        edge_restriction = {}
        for e, (s, t) in base_meta.items():
            edge_restriction[e] = _chain_map(rng, sizes[t], sizes[s], fibers[t], fibers[s])
        restriction = {}
        for a in base.arrows:
            if base.is_identity(a):
                continue
            seq = a.split("*")[::-1]
            fn = identity_functor(fibers[base.tgt[a]])
            for e in reversed(seq):
                fn = compose_functors(edge_restriction[e], fn)
            restriction[a] = fn
        return validate_indexed(base, fibers, restriction)
    fiber = _chain(rng.randint(1, top), "v")
    return validate_indexed(base, {c: fiber for c in base.objects}, {
        f: identity_functor(fiber) for f in base.arrows if not base.is_identity(f)
    })


def graded_chain_indexed(rng: random.Random, chain_base: FinCategory, max_fiber: int) -> IndexedCategory:
    """Over a chain base: chain fibers with one top-preserving step map per
    consecutive level; longer restrictions are the forced composites."""
    n = len(chain_base.objects)
    objs = list(chain_base.objects)
    sizes = [rng.randint(1, max_fiber) for _ in range(n)]
    fibers = {objs[i]: _chain(sizes[i], "v") for i in range(n)}
    steps = []
    for i in range(n - 1):
        steps.append(_chain_map(rng, sizes[i + 1], sizes[i], fibers[objs[i + 1]], fibers[objs[i]]))
    restriction = {}
    for a in chain_base.arrows:
        if chain_base.is_identity(a):
            continue
        i = objs.index(chain_base.src[a])
        j = objs.index(chain_base.tgt[a])
        fn = identity_functor(fibers[objs[j]])
        for k in range(j - 1, i - 1, -1):
            fn = compose_functors(steps[k], fn)
        restriction[a] = fn
    return validate_indexed(chain_base, fibers, restriction)


# ---------------------------------------------------------------------------
# Galois connections (adjoint pairs between posets)


def _poset_leq(cat: FinCategory, x: str, y: str) -> bool:
    return x == y or bool(cat.hom(x, y))


def _poset_functor(obj_map, src: FinCategory, tgt: FinCategory) -> FinFunctor:
    arr_map = {}
    for a in src.arrows:
        x, y = src.src[a], src.tgt[a]
        mx, my = obj_map[x], obj_map[y]
        arr_map[a] = tgt.identity[mx] if mx == my else "{}->{}".format(mx, my)
    return validate_functor(obj_map, arr_map, src, tgt)


def _poset_arrow(cat: FinCategory, x: str, y: str) -> str:
    return cat.identity[x] if x == y else "{}->{}".format(x, y)


def gen_galois(rng: random.Random, caps: Caps) -> Adjunction | None:
    """A verified Galois connection: monotone lower adjoint whose pointwise
    right adjoint exists, with unit/counit read off the orders."""
    for _ in range(40):
        p = gen_poset(rng, caps.base_objects)
        q = gen_poset(rng, caps.base_objects)
        obj_map = {x: rng.choice(list(q.objects)) for x in p.objects}
        if not all(
            _poset_leq(q, obj_map[x], obj_map[y])
            for x in p.objects
            for y in p.objects
            if _poset_leq(p, x, y)
        ):
            continue
        right_map = {}
        ok = True
        for qo in q.objects:
            below = [x for x in p.objects if _poset_leq(q, obj_map[x], qo)]
            top = [x for x in below if all(_poset_leq(p, y, x) for y in below)]
            if len(top) != 1:
                ok = False
                break
            right_map[qo] = top[0]
        if not ok:
            continue
        if not all(
            _poset_leq(q, obj_map[x], qo) == _poset_leq(p, x, right_map[qo])
            for x in p.objects
            for qo in q.objects
        ):
            continue
        if not all(
            _poset_leq(p, right_map[a], right_map[b])
            for a in q.objects
            for b in q.objects
            if _poset_leq(q, a, b)
        ):
            continue
        left = _poset_functor(obj_map, p, q)
        right = _poset_functor(right_map, q, p)
        unit = {x: _poset_arrow(p, x, right_map[obj_map[x]]) for x in p.objects}
        counit = {qo: _poset_arrow(q, obj_map[right_map[qo]], qo) for qo in q.objects}
        try:
            return validate_adjunction(left, right, unit, counit)
        except StructureError:
            continue
    return None


# ---------------------------------------------------------------------------
# Dense inclusions and comorphisms


def gen_dense_pair(rng: random.Random, caps: Caps):
    """A full subcategory inclusion made dense by construction: image-sourced
    families are forced to cover, and the subcategory carries the induced
    topology.  Returns (inclusion, source topology, target topology) or None.
    """
    for _ in range(20):
        cat, kind, meta = gen_category(rng, caps)
        if len(cat.objects) < 1:
            continue
        k = rng.randint(1, len(cat.objects))
        objs = sorted(rng.sample(sorted(cat.objects), k))
        sub = full_subcategory(cat, objs)
        generators = {}
        for c in cat.objects:
            fams = []
            if rng.random() < 0.4:
                into = sorted(cat.into(c))
                fams.append(rng.sample(into, rng.randint(0, min(2, len(into)))))
            if c not in objs:
                fams.append([m for m in cat.into(c) if cat.src[m] in set(objs)])
            if fams:
                generators[c] = fams
        topology = saturate(make_coverage(cat, generators))
        inclusion = validate_functor(
            {c: c for c in sub.objects}, {a: a for a in sub.arrows}, sub, cat
        )
        try:
            induced = induced_image_topology(inclusion, topology)
        except StructureError:
            continue
        return inclusion, induced, topology
    return None


def min_comorphism_topology(functor: FinFunctor, target_topology: Topology) -> Topology:
    """Smallest topology on the source making the functor a comorphism:
    generated by the preimage sieves of target covers of image objects."""
    src = functor.source
    generators: dict[str, list] = {}
    for d in src.objects:
        fams = []
        for sieve in target_topology.covers[functor.ob(d)]:
            fams.append([h for h in src.into(d) if functor.ar(h) in sieve])
        generators[d] = fams
    return saturate(make_coverage(src, generators))


def pushforward_topology(functor: FinFunctor, source_topology: Topology, rng: random.Random | None = None) -> Topology:
    """A target topology making the functor cover-preserving: saturate the
    images of all source covers (plus optional random extra families)."""
    tgt = functor.target
    generators: dict[str, list] = {c: [] for c in tgt.objects}
    for c in functor.source.objects:
        for sieve in source_topology.covers[c]:
            generators[functor.ob(c)].append([functor.ar(f) for f in sorted(sieve)])
    if rng is not None:
        for c in tgt.objects:
            if rng.random() < 0.3:
                into = sorted(tgt.into(c))
                generators[c].append(rng.sample(into, rng.randint(0, min(2, len(into)))))
    return saturate(make_coverage(tgt, generators))


# ---------------------------------------------------------------------------
# Presheaves


def gen_presheaf(rng: random.Random, cat: FinCategory, max_size: int) -> Presheaf:
    non_id = [f for f in cat.arrows if not cat.is_identity(f)]
    for _ in range(50):
        values = {c: tuple(str(i) for i in range(rng.randint(0, max_size))) for c in cat.objects}
        assign: dict[str, dict[str, str]] = {}

        def consistent():
            m = {}
            for f in cat.arrows:
                if cat.is_identity(f):
                    m[f] = {v: v for v in values[cat.src[f]]}
                elif f in assign:
                    m[f] = assign[f]
            for (g, f), h in cat.table.items():
                if g in m and f in m and h in m:
                    for a in values[cat.tgt[g]]:
                        if m[f][m[g][a]] != m[h][a]:
                            return False
            return True

        def go(i):
            if i == len(non_id):
                return True
            f = non_id[i]
            dom, cod = values[cat.tgt[f]], values[cat.src[f]]
            if dom and not cod:
                return False
            images = list(itertools.product(cod, repeat=len(dom)))
            rng.shuffle(images)
            for image in images[:60]:
                assign[f] = dict(zip(dom, image))
                if consistent() and go(i + 1):
                    return True
                del assign[f]
            return False

        if go(0):
            return validate_presheaf(cat, values, {f: dict(m) for f, m in assign.items()})
    return validate_presheaf(cat, {c: () for c in cat.objects}, {})


# ---------------------------------------------------------------------------
# Instance bundles (the generate_instance surface)


KINDS = ("site", "fibration", "site-functor", "comorphism", "dense-pair", "adjoint-pair", "prop33-square")


def generate_instance(kind: str, seed: int, caps: Caps) -> dict:
    """A valid instance of the requested kind, deterministic in the seed.

    Validity is re-checked by the constructors; recipes rejection-sample.
    """
    rng = _rng(seed)
    if kind == "site":
        cat, topology, ckind, meta = gen_site(rng, caps)
        return {"kind": kind, "category": cat, "topology": topology, "recipe": ckind, "meta": meta}
    if kind == "fibration":
        cat, topology, ckind, meta = gen_site(rng, caps)
        cix = gen_indexed(rng, cat, caps, ckind, meta)
        return {"kind": kind, "indexed": cix, "base_topology": topology}
    if kind == "site-functor":
        for _ in range(30):
            src, src_top, _, _ = gen_site(rng, caps)
            tgt, tgt_top, _, _ = gen_site(rng, caps)
            fn = gen_functor(rng, src, tgt)
            if fn is not None:
                return {"kind": kind, "functor": fn, "source_topology": src_top, "target_topology": tgt_top}
        raise GenerationError("no functor found within caps")
    if kind == "comorphism":
        cat, topology, ckind, meta = gen_site(rng, caps)
        for _ in range(30):
            src, _, _, _ = gen_site(rng, caps)
            fn = gen_functor(rng, src, cat)
            if fn is not None:
                return {
                    "kind": kind,
                    "functor": fn,
                    "source_topology": min_comorphism_topology(fn, topology),
                    "target_topology": topology,
                }
        raise GenerationError("no comorphism instance within caps")
    if kind == "dense-pair":
        got = gen_dense_pair(rng, caps)
        if got is None:
            raise GenerationError("no dense pair within caps")
        inclusion, induced, topology = got
        return {"kind": kind, "functor": inclusion, "source_topology": induced, "target_topology": topology}
    if kind == "adjoint-pair":
        adj = gen_galois(rng, caps)
        if adj is None:
            raise GenerationError("no Galois connection within caps")
        return {"kind": kind, "adjunction": adj}
    if kind == "prop33-square":
        cat, topology, ckind, meta = gen_site(rng, caps)
        cix = gen_indexed(rng, cat, caps, ckind, meta)
        if rng.random() < 0.5:
            morphism = gen_indexed_morphism(rng, cix, caps)
            return {
                "kind": kind,
                "flavor": "fixed-base",
                "morphism": morphism,
                "base_topology": topology,
            }
        for _ in range(20):
            src, src_top, _, _ = gen_site(rng, replace(caps, base_objects=min(caps.base_objects, 2)))
            fn = gen_functor(rng, src, cat)
            if fn is not None:
                return {
                    "kind": kind,
                    "flavor": "direct-image",
                    "indexed": cix,
                    "functor": fn,
                    "base_topology": topology,
                    "source_base_topology": src_top,
                }
        morphism = gen_indexed_morphism(rng, cix, caps)
        return {"kind": kind, "flavor": "fixed-base", "morphism": morphism, "base_topology": topology}
    raise GenerationError("unknown instance kind {!r}".format(kind))


# ---------------------------------------------------------------------------
# Shrinking


def shrink_site(category: FinCategory, topology: Topology, still_fails) -> tuple[FinCategory, Topology]:
    """Greedy object deletion preserving failure; topology generators are
    restricted to surviving arrows and re-saturated."""
    cat, top = category, topology
    progress = True
    while progress and len(cat.objects) > 1:
        progress = False
        for drop in sorted(cat.objects):
            objs = [o for o in cat.objects if o != drop]
            try:
                sub = full_subcategory(cat, objs)
                keep = set(sub.arrows)
                gens = {
                    c: [sorted(s & keep) for s in top.covers[c]]
                    for c in sub.objects
                }
                sub_top = saturate(make_coverage(sub, gens))
            except StructureError:
                continue
            if still_fails(sub, sub_top):
                cat, top = sub, sub_top
                progress = True
                break
    return cat, top


def shrink_fibration(cix: IndexedCategory, topology: Topology, still_fails):
    """Greedy base-object deletion, then fiber-object deletion, preserving failure."""
    current = (cix, topology)

    def restrict_base(pair, drop):
        cix, top = pair
        objs = [o for o in cix.base.objects if o != drop]
        if not objs:
            return None
        try:
            sub = full_subcategory(cix.base, objs)
            fibers = {c: cix.fiber[c] for c in sub.objects}
            restriction = {
                f: cix.restriction[f] for f in sub.arrows if not sub.is_identity(f)
            }
            new_cix = validate_indexed(sub, fibers, restriction)
            keep = set(sub.arrows)
            gens = {c: [sorted(s & keep) for s in top.covers[c]] for c in sub.objects}
            return new_cix, saturate(make_coverage(sub, gens))
        except StructureError:
            return None

    def restrict_fiber(pair, c, drop):
        cix, top = pair
        fib = cix.fiber[c]
        objs = [o for o in fib.objects if o != drop]
        if not objs:
            return None
        try:
            sub = full_subcategory(fib, objs)
            fibers = dict(cix.fiber)
            fibers[c] = sub
            restriction = {}
            for f in cix.base.arrows:
                if cix.base.is_identity(f):
                    continue
                fn = cix.restriction[f]
                src_fib = fibers[cix.base.tgt[f]]
                tgt_fib = fibers[cix.base.src[f]]
                obj_map = {x: fn.ob(x) for x in src_fib.objects}
                if not set(obj_map.values()) <= set(tgt_fib.objects):
                    return None
                arr_map = {a: fn.ar(a) for a in src_fib.arrows}
                if not set(arr_map.values()) <= set(tgt_fib.arrows):
                    return None
                restriction[f] = validate_functor(obj_map, arr_map, src_fib, tgt_fib)
            return validate_indexed(cix.base, fibers, restriction), top
        except StructureError:
            return None

    progress = True
    while progress:
        progress = False
        for drop in sorted(current[0].base.objects):
            cand = restrict_base(current, drop)
            if cand is not None and still_fails(*cand):
                current = cand
                progress = True
                break
        if progress:
            continue
        for c in sorted(current[0].base.objects):
            for drop in sorted(current[0].fiber[c].objects):
                cand = restrict_fiber(current, c, drop)
                if cand is not None and still_fails(*cand):
                    current = cand
                    progress = True
                    break
            if progress:
                break
    return current


def describe_instance(instance: dict) -> str:
    """One-line deterministic digest of an instance bundle."""
    bits = [instance.get("kind", "?")]
    for key in sorted(instance):
        val = instance[key]
        if isinstance(val, FinCategory):
            bits.append("{}:|O|={},|A|={}".format(key, len(val.objects), len(val.arrows)))
        elif isinstance(val, IndexedCategory):
            sizes = ",".join(str(len(val.fiber[c].objects)) for c in val.base.objects)
            bits.append("{}:base|O|={} fibers=[{}]".format(key, len(val.base.objects), sizes))
        elif isinstance(val, FinFunctor):
            bits.append("{}:{}->{}".format(key, len(val.source.objects), len(val.target.objects)))
    return " ".join(bits)
