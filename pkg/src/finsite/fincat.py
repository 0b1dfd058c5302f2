"""Validated finite categories and the constructions every other module reuses.

Everything is exact table arithmetic: a category is its composition table,
a functor is a pair of finite maps, and every axiom is checked by exhaustive
enumeration at construction time.  Objects and arrows are opaque string
identifiers; equality is identifier equality, and "up to iso" questions are
always answered by explicit search.
"""
from __future__ import annotations

from dataclasses import dataclass

DEFAULT_MAX_OBJECTS = 64
DEFAULT_MAX_ARROWS = 512


class StructureError(ValueError):
    """A finite structure broke one of its defining axioms.

    ``witness`` carries the offending pair/triple so failures replay.
    """

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True, eq=False)
class FinCategory:
    """An explicit finite category.

    ``table[(g, f)]`` is the composite "g after f"; it is defined exactly on
    the composable pairs.  Instances are immutable and hashable, so derived
    data (sieve lattices, cartesian tables) may be memoised against them.
    """

    objects: tuple[str, ...]
    arrows: tuple[str, ...]
    src: dict[str, str]
    tgt: dict[str, str]
    identity: dict[str, str]
    table: dict[tuple[str, str], str]

    def __post_init__(self):
        into = {c: [] for c in self.objects}
        out = {c: [] for c in self.objects}
        hom: dict[tuple[str, str], list[str]] = {}
        for a in self.arrows:
            into[self.tgt[a]].append(a)
            out[self.src[a]].append(a)
            hom.setdefault((self.src[a], self.tgt[a]), []).append(a)
        object.__setattr__(self, "_into", {c: tuple(v) for c, v in into.items()})
        object.__setattr__(self, "_out", {c: tuple(v) for c, v in out.items()})
        object.__setattr__(self, "_hom", {k: tuple(v) for k, v in hom.items()})
        object.__setattr__(self, "_ids", frozenset(self.identity.values()))
        key = (
            self.objects,
            self.arrows,
            tuple(sorted(self.src.items())),
            tuple(sorted(self.tgt.items())),
            tuple(sorted(self.identity.items())),
            tuple(sorted(self.table.items())),
        )
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_inverse_cache", {})
        object.__setattr__(self, "_scratch", {})

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        return isinstance(other, FinCategory) and self._key == other._key

    def __repr__(self):
        return "FinCategory({} objects, {} arrows)".format(len(self.objects), len(self.arrows))

    def compose(self, g: str, f: str) -> str:
        return self.table[(g, f)]

    def hom(self, x: str, y: str) -> tuple[str, ...]:
        return self._hom.get((x, y), ())

    def into(self, c: str) -> tuple[str, ...]:
        return self._into[c]

    def out_of(self, c: str) -> tuple[str, ...]:
        return self._out[c]

    def is_identity(self, a: str) -> bool:
        return a in self._ids

    def inverse(self, a: str) -> str | None:
        """The two-sided inverse of ``a``, or None. Found by search, cached."""
        cache = self._inverse_cache
        if a not in cache:
            found = None
            x, y = self.src[a], self.tgt[a]
            for b in self.hom(y, x):
                if self.compose(b, a) == self.identity[x] and self.compose(a, b) == self.identity[y]:
                    found = b
                    break
            cache[a] = found
        return cache[a]

    def is_iso(self, a: str) -> bool:
        return self.inverse(a) is not None


def validate_category(
    objects,
    arrows,
    identity,
    table,
    max_objects: int = DEFAULT_MAX_OBJECTS,
    max_arrows: int = DEFAULT_MAX_ARROWS,
) -> FinCategory:
    """Validate raw tables and return the FinCategory they present.

    ``arrows`` maps arrow name -> (source, target).  Fails on the first
    violated axiom, naming the witnessing pair or triple.
    """
    objects = tuple(sorted(objects))
    if len(set(objects)) != len(objects):
        raise StructureError("duplicate object identifiers")
    if len(objects) > max_objects:
        raise StructureError("object cap exceeded: {} > {}".format(len(objects), max_objects))
    arrows = dict(arrows)
    names = tuple(sorted(arrows))
    if len(names) > max_arrows:
        raise StructureError("arrow cap exceeded: {} > {}".format(len(names), max_arrows))
    obj_set = set(objects)
    src, tgt = {}, {}
    for a in names:
        s, t = arrows[a]
        if s not in obj_set or t not in obj_set:
            raise StructureError("arrow {} has dangling endpoint ({}, {})".format(a, s, t), witness=a)
        src[a], tgt[a] = s, t
    identity = dict(identity)
    for c in objects:
        i = identity.get(c)
        if i is None:
            raise StructureError("object {} has no identity arrow".format(c), witness=c)
        if i not in arrows or src[i] != c or tgt[i] != c:
            raise StructureError("identity of {} is not an endo-arrow on it".format(c), witness=c)
    table = dict(table)
    for (g, f), h in sorted(table.items()):
        if g not in arrows or f not in arrows:
            raise StructureError("composite of unknown arrows ({}, {})".format(g, f), witness=(g, f))
        if src[g] != tgt[f]:
            raise StructureError("non-composable pair ({}, {})".format(g, f), witness=(g, f))
        if h not in arrows:
            raise StructureError("composite ({}, {}) lands outside the arrow set".format(g, f), witness=(g, f))
        if src[h] != src[f] or tgt[h] != tgt[g]:
            raise StructureError("composite of ({}, {}) has wrong endpoints".format(g, f), witness=(g, f))
    for g in names:
        for f in names:
            if src[g] == tgt[f] and (g, f) not in table:
                raise StructureError("composable pair ({}, {}) left undefined".format(g, f), witness=(g, f))
    for f in names:
        if table[(f, identity[src[f]])] != f:
            raise StructureError("right unit law fails at {}".format(f), witness=f)
        if table[(identity[tgt[f]], f)] != f:
            raise StructureError("left unit law fails at {}".format(f), witness=f)
    cat = FinCategory(objects, names, src, tgt, identity, table)
    for g in names:
        for f in cat.into(src[g]):
            gf = table[(g, f)]
            for h in cat.out_of(tgt[g]):
                if table[(h, gf)] != table[(table[(h, g)], f)]:
                    raise StructureError(
                        "associativity fails on ({}, {}, {})".format(h, g, f), witness=(h, g, f)
                    )
    return cat


def build_category(objects, arrows, compose=(), max_objects=DEFAULT_MAX_OBJECTS, max_arrows=DEFAULT_MAX_ARROWS) -> FinCategory:
    """Ergonomic constructor: identities are named id_<obj> and unit composites filled in.

    ``arrows`` maps non-identity arrow names to (src, tgt); ``compose`` lists
    the non-identity composites as a mapping (g, f) -> h.
    """
    arrows = dict(arrows)
    identity = {c: "id_" + c for c in objects}
    full = dict(arrows)
    for c, i in identity.items():
        if i in arrows:
            raise StructureError("arrow name {} collides with an identity".format(i))
        full[i] = (c, c)
    table = dict(compose)
    for a, (s, t) in full.items():
        table[(a, identity[s])] = a
        table[(identity[t], a)] = a
    return validate_category(objects, full, identity, table, max_objects, max_arrows)


def terminal_category() -> FinCategory:
    return build_category(("*",), {})


def poset_category(objects, leq) -> FinCategory:
    """The category of a finite poset. ``leq`` is any set of (x, y) pairs; its
    reflexive-transitive closure is taken, and antisymmetry is enforced."""
    objects = tuple(objects)
    rel = {(x, x) for x in objects} | {tuple(p) for p in leq}
    changed = True
    while changed:
        changed = False
        for (x, y) in list(rel):
            for (y2, z) in list(rel):
                if y2 == y and (x, z) not in rel:
                    rel.add((x, z))
                    changed = True
    for x, y in rel:
        if x != y and (y, x) in rel:
            raise StructureError("not antisymmetric: {} and {}".format(x, y), witness=(x, y))
    arrows = {}
    for x, y in sorted(rel):
        if x != y:
            arrows["{}->{}".format(x, y)] = (x, y)
    compose = {}
    for g, (gy, gz) in arrows.items():
        for f, (fx, fy) in arrows.items():
            if fy == gy:
                compose[(g, f)] = "{}->{}".format(fx, gz)
    return build_category(objects, arrows, compose)


def free_category(objects, edges, path_cap: int = 64) -> FinCategory:
    """The free category on a finite acyclic graph: arrows are edge paths.

    A path applying e1 then e2 is named "e2*e1". Raises if the graph has a
    cycle or generates more than ``path_cap`` paths.
    """
    edges = dict(edges)
    paths = {e: (e,) for e in edges}
    ends = {e: edges[e] for e in edges}
    frontier = list(edges)
    arrows = dict(ends)
    while frontier:
        nxt = []
        for p in frontier:
            for e, (s, t) in edges.items():
                if s == ends[p][1]:
                    name = e + "*" + p
                    seq = paths[p] + (e,)
                    if len(seq) > len(objects):
                        raise StructureError("cyclic graph: path {} exceeds object count".format(name))
                    paths[name] = seq
                    ends[name] = (ends[p][0], t)
                    arrows[name] = ends[name]
                    nxt.append(name)
                    if len(arrows) > path_cap:
                        raise StructureError("path cap exceeded in free category")
        frontier = nxt
    by_seq = {seq: name for name, seq in paths.items()}
    compose = {}
    for g, gseq in paths.items():
        for f, fseq in paths.items():
            if ends[f][1] == ends[g][0]:
                compose[(g, f)] = by_seq[fseq + gseq]
    return build_category(tuple(objects), arrows, compose)


def full_subcategory(cat: FinCategory, objects) -> FinCategory:
    objects = tuple(o for o in cat.objects if o in set(objects))
    keep = {a for a in cat.arrows if cat.src[a] in objects and cat.tgt[a] in objects}
    arrows = {a: (cat.src[a], cat.tgt[a]) for a in cat.arrows if a in keep}
    identity = {c: cat.identity[c] for c in objects}
    table = {p: h for p, h in cat.table.items() if p[0] in keep and p[1] in keep}
    return validate_category(objects, arrows, identity, table)


def disjoint_union(left: FinCategory, right: FinCategory, tags=("L:", "R:")) -> FinCategory:
    lt, rt = tags
    objects = tuple(lt + o for o in left.objects) + tuple(rt + o for o in right.objects)
    arrows = {}
    identity = {}
    table = {}
    for tag, cat in ((lt, left), (rt, right)):
        for a in cat.arrows:
            arrows[tag + a] = (tag + cat.src[a], tag + cat.tgt[a])
        for c, i in cat.identity.items():
            identity[tag + c] = tag + i
        for (g, f), h in cat.table.items():
            table[(tag + g, tag + f)] = tag + h
    return validate_category(objects, arrows, identity, table)


@dataclass(frozen=True)
class FinFunctor:
    source: FinCategory
    target: FinCategory
    obj_map: dict[str, str]
    arr_map: dict[str, str]

    def ob(self, x: str) -> str:
        return self.obj_map[x]

    def ar(self, f: str) -> str:
        return self.arr_map[f]

    def __repr__(self):
        return "FinFunctor({} -> {})".format(len(self.source.objects), len(self.target.objects))


def validate_functor(obj_map, arr_map, source: FinCategory, target: FinCategory) -> FinFunctor:
    """Check totality and functoriality; errors name the violated composite."""
    obj_map, arr_map = dict(obj_map), dict(arr_map)
    for x in source.objects:
        if x not in obj_map:
            raise StructureError("dangling object {}".format(x), witness=x)
        if obj_map[x] not in set(target.objects):
            raise StructureError("object {} maps outside the target".format(x), witness=x)
    for f in source.arrows:
        g = arr_map.get(f)
        if g is None:
            raise StructureError("arrow {} has no image".format(f), witness=f)
        if g not in set(target.arrows):
            raise StructureError("arrow {} maps outside the target".format(f), witness=f)
        if target.src[g] != obj_map[source.src[f]] or target.tgt[g] != obj_map[source.tgt[f]]:
            raise StructureError("image of {} has wrong endpoints".format(f), witness=f)
    for c in source.objects:
        if arr_map[source.identity[c]] != target.identity[obj_map[c]]:
            raise StructureError("identity of {} not preserved".format(c), witness=c)
    for (g, f), h in source.table.items():
        if target.compose(arr_map[g], arr_map[f]) != arr_map[h]:
            raise StructureError("composite ({}, {}) not preserved".format(g, f), witness=(g, f))
    return FinFunctor(source, target, obj_map, arr_map)


def identity_functor(cat: FinCategory) -> FinFunctor:
    return FinFunctor(cat, cat, {c: c for c in cat.objects}, {a: a for a in cat.arrows})


def constant_functor(source: FinCategory, target: FinCategory, obj: str) -> FinFunctor:
    return validate_functor(
        {c: obj for c in source.objects},
        {a: target.identity[obj] for a in source.arrows},
        source,
        target,
    )


def compose_functors(g: FinFunctor, f: FinFunctor) -> FinFunctor:
    if f.target != g.source:
        raise StructureError("functors not composable")
    return FinFunctor(
        f.source,
        g.target,
        {x: g.ob(f.ob(x)) for x in f.source.objects},
        {a: g.ar(f.ar(a)) for a in f.source.arrows},
    )


def functor_equal(p: FinFunctor, q: FinFunctor) -> bool:
    return (
        p.source == q.source
        and p.target == q.target
        and p.obj_map == q.obj_map
        and p.arr_map == q.arr_map
    )


@dataclass(frozen=True)
class NatTransform:
    source: FinFunctor
    target: FinFunctor
    component: dict[str, str]


def validate_transform(component, source: FinFunctor, target: FinFunctor) -> NatTransform:
    if source.source != target.source or source.target != target.target:
        raise StructureError("parallel functors required")
    cat, dcat = source.source, source.target
    component = dict(component)
    arrow_set = set(dcat.arrows)
    for c in cat.objects:
        a = component.get(c)
        if a is None:
            raise StructureError("missing component at {}".format(c), witness=c)
        if a not in arrow_set:
            raise StructureError("component at {} is not an arrow of the target".format(c), witness=c)
        if dcat.src[a] != source.ob(c) or dcat.tgt[a] != target.ob(c):
            raise StructureError("component at {} has wrong endpoints".format(c), witness=c)
    for f in cat.arrows:
        x, y = cat.src[f], cat.tgt[f]
        if dcat.compose(target.ar(f), component[x]) != dcat.compose(component[y], source.ar(f)):
            raise StructureError("naturality fails at {}".format(f), witness=f)
    return NatTransform(source, target, component)


def identity_transform(f: FinFunctor) -> NatTransform:
    return NatTransform(f, f, {c: f.target.identity[f.ob(c)] for c in f.source.objects})


def is_natural(component, source: FinFunctor, target: FinFunctor) -> bool:
    try:
        validate_transform(component, source, target)
        return True
    except StructureError:
        return False


# ---------------------------------------------------------------------------
# Comma categories


def _triple_name(d, d2, u):
    return "({},{},{})".format(d, d2, u)


@dataclass(frozen=True)
class CommaCategory:
    """The category of triples (d, d', u: F(d) -> G(d')) with its projections."""

    category: FinCategory
    left: FinFunctor
    right: FinFunctor
    obj_data: dict[str, tuple[str, str, str]]
    arr_data: dict[str, tuple[str, str]]


def comma_category(f_leg: FinFunctor, g_leg: FinFunctor, max_objects=DEFAULT_MAX_OBJECTS, max_arrows=DEFAULT_MAX_ARROWS) -> CommaCategory:
    if f_leg.target != g_leg.target:
        raise StructureError("comma legs must share a target category")
    amb = f_leg.target
    cd, cd2 = f_leg.source, g_leg.source
    obj_data = {}
    for d in cd.objects:
        for d2 in cd2.objects:
            for u in amb.hom(f_leg.ob(d), g_leg.ob(d2)):
                obj_data[_triple_name(d, d2, u)] = (d, d2, u)
    names = tuple(sorted(obj_data))
    arr_data = {}
    arrows = {}
    for o1 in names:
        d1, d12, u1 = obj_data[o1]
        for o2 in names:
            d2, d22, u2 = obj_data[o2]
            for w in cd.hom(d1, d2):
                for w2 in cd2.hom(d12, d22):
                    if amb.compose(g_leg.ar(w2), u1) == amb.compose(u2, f_leg.ar(w)):
                        name = "({},{}):{}->{}".format(w, w2, o1, o2)
                        arr_data[name] = (w, w2)
                        arrows[name] = (o1, o2)
    identity = {}
    for o in names:
        d, d2, _ = obj_data[o]
        identity[o] = "({},{}):{}->{}".format(cd.identity[d], cd2.identity[d2], o, o)
    table = {}
    for b, (bs, bt) in arrows.items():
        for a, (asrc, at) in arrows.items():
            if at == bs:
                w2c = cd.compose(arr_data[b][0], arr_data[a][0])
                w2c2 = cd2.compose(arr_data[b][1], arr_data[a][1])
                table[(b, a)] = "({},{}):{}->{}".format(w2c, w2c2, asrc, bt)
    cat = validate_category(names, arrows, identity, table, max_objects, max_arrows)
    proj_l = validate_functor(
        {o: obj_data[o][0] for o in names},
        {a: arr_data[a][0] for a in arrows},
        cat,
        cd,
    )
    proj_r = validate_functor(
        {o: obj_data[o][1] for o in names},
        {a: arr_data[a][1] for a in arrows},
        cat,
        cd2,
    )
    return CommaCategory(cat, proj_l, proj_r, obj_data, arr_data)


@dataclass(frozen=True)
class ArrowCategory:
    category: FinCategory
    dom: FinFunctor
    cod: FinFunctor
    of_arrow: dict[str, str]


def arrow_category(cat: FinCategory) -> ArrowCategory:
    """Built directly (not via comma) so it can serve as an independent oracle."""
    of_arrow = {u: "[{}]".format(u) for u in cat.arrows}
    names = tuple(sorted(of_arrow.values()))
    back = {v: k for k, v in of_arrow.items()}
    arrows = {}
    arr_data = {}
    for o1 in names:
        u1 = back[o1]
        for o2 in names:
            u2 = back[o2]
            for w1 in cat.hom(cat.src[u1], cat.src[u2]):
                for w2 in cat.hom(cat.tgt[u1], cat.tgt[u2]):
                    if cat.compose(u2, w1) == cat.compose(w2, u1):
                        name = "[{},{}]:{}->{}".format(w1, w2, o1, o2)
                        arrows[name] = (o1, o2)
                        arr_data[name] = (w1, w2)
    identity = {}
    for o in names:
        u = back[o]
        identity[o] = "[{},{}]:{}->{}".format(cat.identity[cat.src[u]], cat.identity[cat.tgt[u]], o, o)
    table = {}
    for b, (bs, bt) in arrows.items():
        for a, (asrc, at) in arrows.items():
            if at == bs:
                w1 = cat.compose(arr_data[b][0], arr_data[a][0])
                w2 = cat.compose(arr_data[b][1], arr_data[a][1])
                table[(b, a)] = "[{},{}]:{}->{}".format(w1, w2, asrc, bt)
    acat = validate_category(names, arrows, identity, table)
    dom = validate_functor({o: cat.src[back[o]] for o in names}, {a: arr_data[a][0] for a in arrows}, acat, cat)
    cod = validate_functor({o: cat.tgt[back[o]] for o in names}, {a: arr_data[a][1] for a in arrows}, acat, cat)
    return ArrowCategory(acat, dom, cod, of_arrow)


def connected_components(cat: FinCategory) -> tuple[tuple[str, ...], ...]:
    """Partition of objects by zig-zag reachability (arrows in either direction)."""
    parent = {c: c for c in cat.objects}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in cat.arrows:
        rx, ry = find(cat.src[a]), find(cat.tgt[a])
        if rx != ry:
            parent[ry] = rx
    groups: dict[str, list[str]] = {}
    for c in cat.objects:
        groups.setdefault(find(c), []).append(c)
    return tuple(tuple(sorted(g)) for g in sorted(groups.values(), key=lambda g: sorted(g)[0]))


# ---------------------------------------------------------------------------
# Adjunctions and equivalences


@dataclass(frozen=True)
class Adjunction:
    """left -| right with left: A -> B, right: B -> A.

    unit has components at A-objects (a -> right(left(a))), counit at
    B-objects (left(right(b)) -> b).
    """

    left: FinFunctor
    right: FinFunctor
    unit: dict[str, str]
    counit: dict[str, str]


def _components_of(data):
    return dict(data.component) if isinstance(data, NatTransform) else dict(data)


def check_adjunction(left: FinFunctor, right: FinFunctor, unit, counit) -> bool:
    """True iff (unit, counit) exhibit left -| right via the triangle identities.

    Returns False when the supplied components do not even typecheck as
    Id => right.left / left.right => Id; raises only on incomposable functors.
    """
    if left.source != right.target or left.target != right.source:
        raise StructureError("functors do not form a composable adjoint pair")
    a_cat, b_cat = left.source, left.target
    unit = _components_of(unit)
    counit = _components_of(counit)
    if not is_natural(unit, identity_functor(a_cat), compose_functors(right, left)):
        return False
    if not is_natural(counit, compose_functors(left, right), identity_functor(b_cat)):
        return False
    for a in a_cat.objects:
        lhs = b_cat.compose(counit[left.ob(a)], left.ar(unit[a]))
        if lhs != b_cat.identity[left.ob(a)]:
            return False
    for b in b_cat.objects:
        lhs = a_cat.compose(right.ar(counit[b]), unit[right.ob(b)])
        if lhs != a_cat.identity[right.ob(b)]:
            return False
    return True


def validate_adjunction(left, right, unit, counit) -> Adjunction:
    if not check_adjunction(left, right, unit, counit):
        raise StructureError("triangle identities fail for the supplied adjunction data")
    return Adjunction(left, right, _components_of(unit), _components_of(counit))


def is_equivalence(f: FinFunctor) -> tuple[bool, tuple]:
    """Full + faithful + essentially surjective, by exhaustive hom comparison.

    The witness is either the failing datum or a per-object iso table.
    """
    src, tgt = f.source, f.target
    for x in src.objects:
        for y in src.objects:
            seen = {}
            for a in src.hom(x, y):
                img = f.ar(a)
                if img in seen:
                    return False, ("not_faithful", (x, y, seen[img], a))
                seen[img] = a
            for g in tgt.hom(f.ob(x), f.ob(y)):
                if g not in seen:
                    return False, ("not_full", (x, y, g))
    table = {}
    for d in tgt.objects:
        hit = None
        for c in src.objects:
            for a in tgt.hom(f.ob(c), d):
                if tgt.is_iso(a):
                    hit = (c, a)
                    break
            if hit:
                break
        if hit is None:
            return False, ("not_essentially_surjective", d)
        table[d] = hit
    return True, ("essential_preimages", tuple(sorted(table.items())))


def natural_iso_search(p: FinFunctor, q: FinFunctor) -> dict[str, str] | None:
    """Find one natural isomorphism p => q by backtracking, or None."""
    if p.source != q.source or p.target != q.target:
        return None
    cat, dcat = p.source, p.target
    objs = list(cat.objects)
    candidates = {}
    for c in objs:
        isos = [a for a in dcat.hom(p.ob(c), q.ob(c)) if dcat.is_iso(a)]
        if not isos:
            return None
        candidates[c] = isos
    assign: dict[str, str] = {}

    def consistent(c):
        for f in cat.arrows:
            x, y = cat.src[f], cat.tgt[f]
            if x in assign and y in assign:
                if dcat.compose(q.ar(f), assign[x]) != dcat.compose(assign[y], p.ar(f)):
                    return False
        return True

    def go(i):
        if i == len(objs):
            return True
        c = objs[i]
        for a in candidates[c]:
            assign[c] = a
            if consistent(c) and go(i + 1):
                return True
            del assign[c]
        return False

    return dict(assign) if go(0) else None
