"""Indexed categories, Grothendieck constructions and base-change machinery.

Pseudofunctors are strictified: a restriction table must be functorial on
the nose, which every corpus and fuzzed instance satisfies.  Cartesianness
of arrows is always decided by the exhaustive unique-lifting search; the
classical "vertical part is iso" characterisation is only ever used as a
cross-check, never trusted.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import limits
from .fincat import (
    Adjunction,
    FinCategory,
    FinFunctor,
    NatTransform,
    StructureError,
    check_adjunction,
    compose_functors,
    functor_equal,
    identity_functor,
    natural_iso_search,
    validate_category,
    validate_functor,
    validate_transform,
)
from .sieves import Topology, make_coverage, saturate


def pair_obj(x: str, c: str) -> str:
    return "({},{})".format(x, c)


def pair_arr(u: str, f: str, src: str, tgt: str) -> str:
    return "({},{}):{}->{}".format(u, f, src, tgt)


@dataclass(frozen=True)
class IndexedCategory:
    """A strict contravariant assignment of fiber categories to a base.

    ``restriction[f]`` for f: c -> c' is a functor fiber(c') -> fiber(c).
    """

    base: FinCategory
    fiber: dict[str, FinCategory]
    restriction: dict[str, FinFunctor]


def validate_indexed(base: FinCategory, fiber, restriction) -> IndexedCategory:
    fiber = dict(fiber)
    restriction = dict(restriction)
    for c in base.objects:
        if c not in fiber:
            raise StructureError("missing fiber over {}".format(c), witness=c)
    for f in base.arrows:
        if base.is_identity(f):
            restriction.setdefault(f, identity_functor(fiber[base.src[f]]))
    for f in base.arrows:
        r = restriction.get(f)
        if r is None:
            raise StructureError("missing restriction along {}".format(f), witness=f)
        if r.source != fiber[base.tgt[f]] or r.target != fiber[base.src[f]]:
            raise StructureError("restriction along {} has wrong endpoints".format(f), witness=f)
    for c in base.objects:
        if not functor_equal(restriction[base.identity[c]], identity_functor(fiber[c])):
            raise StructureError("restriction along id_{} is not the identity".format(c), witness=c)
    for (g, f), h in base.table.items():
        lhs = compose_functors(restriction[f], restriction[g])
        if not functor_equal(lhs, restriction[h]):
            raise StructureError(
                "restrictions not strictly functorial on ({}, {})".format(g, f), witness=(g, f)
            )
    return IndexedCategory(base, fiber, restriction)


@dataclass(frozen=True)
class FibrationBundle:
    """A total category with its projection, cached cartesian table and an
    optional topology on the total category."""

    total: FinCategory
    projection: FinFunctor
    cartesian: frozenset[str]
    giraud: Topology | None = None
    indexed: IndexedCategory | None = None
    obj_pair: dict[str, tuple[str, str]] | None = None
    arr_pair: dict[str, tuple[str, str]] | None = None

    @property
    def base(self) -> FinCategory:
        return self.projection.target

    def with_giraud(self, topology: Topology) -> "FibrationBundle":
        return FibrationBundle(
            self.total, self.projection, self.cartesian, topology, self.indexed, self.obj_pair, self.arr_pair
        )


def arrow_is_cartesian(total: FinCategory, proj: FinFunctor, f: str) -> bool:
    """The unique-lifting property, checked over all candidate triples.

    For g: d'' -> tgt(f) and h: p(d'') -> p(src(f)) with p(f).h = p(g) there
    must be exactly one h': d'' -> src(f) over h with f.h' = g.
    """
    base = proj.target
    d_prime, d = total.src[f], total.tgt[f]
    pf = proj.ar(f)
    for d2 in total.objects:
        homs = total.hom(d2, d_prime)
        for g in total.hom(d2, d):
            pg = proj.ar(g)
            for h in base.hom(proj.ob(d2), proj.ob(d_prime)):
                if base.compose(pf, h) != pg:
                    continue
                lifts = [h2 for h2 in homs if proj.ar(h2) == h and total.compose(f, h2) == g]
                if len(lifts) != 1:
                    return False
    return True


def make_bundle(total: FinCategory, projection: FinFunctor, indexed=None, obj_pair=None, arr_pair=None) -> FibrationBundle:
    cartesian = frozenset(a for a in total.arrows if arrow_is_cartesian(total, projection, a))
    return FibrationBundle(total, projection, cartesian, None, indexed, obj_pair, arr_pair)


def is_cartesian_arrow(bundle: FibrationBundle, f: str, mode: str = "strict") -> bool:
    """Def-2.2(a) check; the mode flag is accepted for uniformity but the
    unique-lifting property itself does not involve the street iso."""
    assert mode in ("strict", "street")
    return f in bundle.cartesian


def grothendieck(cix: IndexedCategory) -> FibrationBundle:
    """Total category of pairs, projection, and a fully recomputed cartesian table."""
    base = cix.base
    obj_pair = {}
    for c in base.objects:
        for x in cix.fiber[c].objects:
            obj_pair[pair_obj(x, c)] = (x, c)
    names = tuple(sorted(obj_pair))
    arrows = {}
    arr_pair = {}
    for o1 in names:
        x1, c1 = obj_pair[o1]
        for o2 in names:
            x2, c2 = obj_pair[o2]
            for f in base.hom(c1, c2):
                rx2 = cix.restriction[f].ob(x2)
                for u in cix.fiber[c1].hom(x1, rx2):
                    name = pair_arr(u, f, o1, o2)
                    arrows[name] = (o1, o2)
                    arr_pair[name] = (u, f)
    identity = {}
    for o in names:
        x, c = obj_pair[o]
        identity[o] = pair_arr(cix.fiber[c].identity[x], base.identity[c], o, o)
    table = {}
    for b, (bs, bt) in arrows.items():
        for a, (asrc, at) in arrows.items():
            if at != bs:
                continue
            u1, f1 = arr_pair[a]
            u2, f2 = arr_pair[b]
            c1 = obj_pair[asrc][1]
            vert = cix.fiber[c1].compose(cix.restriction[f1].ar(u2), u1)
            table[(b, a)] = pair_arr(vert, base.compose(f2, f1), asrc, bt)
    total = validate_category(names, arrows, identity, table)
    proj = validate_functor(
        {o: obj_pair[o][1] for o in names},
        {a: arr_pair[a][1] for a in arrows},
        total,
        base,
    )
    return make_bundle(total, proj, cix, obj_pair, arr_pair)


def is_fibration(bundle: FibrationBundle, mode: str = "strict") -> tuple[bool, tuple]:
    """Every base arrow into a projected object must admit a cartesian lift.

    strict: the lift lives exactly over the arrow; street: an iso sigma with
    p(lift) = f . sigma is searched.
    """
    assert mode in ("strict", "street")
    total, proj, base = bundle.total, bundle.projection, bundle.base
    for d in total.objects:
        pd = proj.ob(d)
        for f in base.into(pd):
            found = False
            for lift in total.into(d):
                if lift not in bundle.cartesian:
                    continue
                pl = proj.ar(lift)
                if mode == "strict":
                    if pl == f:
                        found = True
                        break
                else:
                    for sigma in base.hom(proj.ob(total.src[lift]), base.src[f]):
                        if base.is_iso(sigma) and base.compose(f, sigma) == pl:
                            found = True
                            break
                    if found:
                        break
            if not found:
                return False, ("missing_lift", (f, d))
    return True, ()


def is_morphism_of_fibrations(
    a_fun: FinFunctor,
    b_fun: FinFunctor,
    src: FibrationBundle,
    tgt: FibrationBundle,
    square_iso: NatTransform | dict,
) -> tuple[bool, tuple]:
    """Square commutes up to the given iso and cartesian arrows map to cartesian arrows."""
    if a_fun.source != src.total or a_fun.target != tgt.total:
        raise StructureError("top functor endpoints do not match the bundles")
    if b_fun.source != src.base or b_fun.target != tgt.base:
        raise StructureError("base functor endpoints do not match the bundles")
    top = compose_functors(tgt.projection, a_fun)
    bottom = compose_functors(b_fun, src.projection)
    comp = square_iso.component if isinstance(square_iso, NatTransform) else dict(square_iso)
    try:
        validate_transform(comp, top, bottom)
    except StructureError as err:
        return False, ("square_not_natural", str(err))
    for c in src.total.objects:
        if not tgt.base.is_iso(comp[c]):
            return False, ("square_component_not_iso", c)
    for f in sorted(src.cartesian):
        if a_fun.ar(f) not in tgt.cartesian:
            return False, ("cartesian_broken", f)
    return True, ()


def fiber_functor(a_fun: FinFunctor, b_fun: FinFunctor, src: FibrationBundle, tgt: FibrationBundle, c: str) -> FinFunctor:
    """Restriction of a strictly square-commuting functor to the fiber over c."""
    if src.indexed is None or tgt.indexed is None:
        raise StructureError("fiber_functor needs grothendieck-built bundles")
    if not functor_equal(compose_functors(tgt.projection, a_fun), compose_functors(b_fun, src.projection)):
        raise StructureError("square must commute strictly for fiber restriction")
    fib = src.indexed.fiber[c]
    out_fib = tgt.indexed.fiber[b_fun.ob(c)]
    obj_map = {}
    for x in fib.objects:
        y, bc = tgt.obj_pair[a_fun.ob(pair_obj(x, c))]
        assert bc == b_fun.ob(c)
        obj_map[x] = y
    arr_map = {}
    idc = src.base.identity[c]
    for u in fib.arrows:
        o1 = pair_obj(fib.src[u], c)
        o2 = pair_obj(fib.tgt[u], c)
        v, g = tgt.arr_pair[a_fun.ar(pair_arr(u, idc, o1, o2))]
        if not tgt.base.is_identity(g):
            raise StructureError("functor does not preserve verticality at {}".format(u), witness=u)
        arr_map[u] = v
    return validate_functor(obj_map, arr_map, fib, out_fib)


def cartesian_lift_name(cix: IndexedCategory, x: str, c: str, f: str) -> str:
    """The canonical lift (1, f): (C(f)(x), src f) -> (x, c) of f: src -> c."""
    sf = cix.base.src[f]
    rx = cix.restriction[f].ob(x)
    return pair_arr(cix.fiber[sf].identity[rx], f, pair_obj(rx, sf), pair_obj(x, c))


def giraud_topology(cix: IndexedCategory, base_topology: Topology, bundle: FibrationBundle | None = None) -> Topology:
    """Saturation of the coverage whose generators at (x, c) are the canonical
    cartesian-lift families of the covering sieves of c."""
    if base_topology.base != cix.base:
        raise StructureError("base topology lives on the wrong category")
    if bundle is None:
        bundle = grothendieck(cix)
    generators: dict[str, set[frozenset[str]]] = {}
    for name, (x, c) in bundle.obj_pair.items():
        fams = set()
        for sieve in base_topology.covers[c]:
            fams.add(frozenset(cartesian_lift_name(cix, x, c, f) for f in sieve))
        generators[name] = fams
    return saturate(make_coverage(bundle.total, generators))


def giraud_bundle(cix: IndexedCategory, base_topology: Topology) -> FibrationBundle:
    bundle = grothendieck(cix)
    return bundle.with_giraud(giraud_topology(cix, base_topology, bundle))


# ---------------------------------------------------------------------------
# Morphisms of indexed categories (fixed base)


@dataclass(frozen=True)
class IndexedMorphism:
    source: IndexedCategory
    target: IndexedCategory
    components: dict[str, FinFunctor]


def validate_indexed_morphism(source: IndexedCategory, target: IndexedCategory, components) -> IndexedMorphism:
    if source.base != target.base:
        raise StructureError("indexed morphism needs a common base")
    components = dict(components)
    for c in source.base.objects:
        a_c = components.get(c)
        if a_c is None or a_c.source != source.fiber[c] or a_c.target != target.fiber[c]:
            raise StructureError("bad component at {}".format(c), witness=c)
    for f in source.base.arrows:
        c, c2 = source.base.src[f], source.base.tgt[f]
        lhs = compose_functors(components[c], source.restriction[f])
        rhs = compose_functors(target.restriction[f], components[c2])
        if not functor_equal(lhs, rhs):
            raise StructureError("components not natural along {}".format(f), witness=f)
    return IndexedMorphism(source, target, components)


def total_functor(morphism: IndexedMorphism, src: FibrationBundle, tgt: FibrationBundle) -> FinFunctor:
    """The induced functor between Grothendieck constructions over the identity base."""
    obj_map = {}
    for name, (x, c) in src.obj_pair.items():
        obj_map[name] = pair_obj(morphism.components[c].ob(x), c)
    arr_map = {}
    for name, (u, f) in src.arr_pair.items():
        o1, o2 = src.total.src[name], src.total.tgt[name]
        x1, c1 = src.obj_pair[o1]
        arr_map[name] = pair_arr(morphism.components[c1].ar(u), f, obj_map[o1], obj_map[o2])
    return validate_functor(obj_map, arr_map, src.total, tgt.total)


# ---------------------------------------------------------------------------
# Direct image (pullback of the fibration)


@dataclass(frozen=True)
class DirectImage:
    indexed: IndexedCategory
    along: FinFunctor
    q: FinFunctor
    source: FibrationBundle
    target: FibrationBundle


def direct_image(dix: IndexedCategory, functor: FinFunctor) -> DirectImage:
    """Precompose the indexed category with the functor; q is the second
    projection of the resulting pullback square of total categories."""
    if functor.target != dix.base:
        raise StructureError("functor must land in the indexed category's base")
    fiber = {c: dix.fiber[functor.ob(c)] for c in functor.source.objects}
    restriction = {f: dix.restriction[functor.ar(f)] for f in functor.source.arrows}
    pulled = validate_indexed(functor.source, fiber, restriction)
    src = grothendieck(pulled)
    tgt = grothendieck(dix)
    obj_map = {}
    for name, (x, c) in src.obj_pair.items():
        obj_map[name] = pair_obj(x, functor.ob(c))
    arr_map = {}
    for name, (u, f) in src.arr_pair.items():
        o1, o2 = src.total.src[name], src.total.tgt[name]
        arr_map[name] = pair_arr(u, functor.ar(f), obj_map[o1], obj_map[o2])
    q = validate_functor(obj_map, arr_map, src.total, tgt.total)
    return DirectImage(pulled, functor, q, src, tgt)


def q_reflects_cartesian(instance: DirectImage) -> tuple[bool, tuple]:
    """f cartesian iff q(f) cartesian, both directions by the lifting search."""
    for f in instance.source.total.arrows:
        up = f in instance.source.cartesian
        down = instance.q.ar(f) in instance.target.cartesian
        if up != down:
            return False, ("mismatch", (f, up, down))
    return True, ()


# ---------------------------------------------------------------------------
# Inverse image along a right adjoint


@dataclass(frozen=True)
class InverseImage:
    indexed: IndexedCategory
    q: FinFunctor
    comparison: FinFunctor
    unit: dict[str, str]
    counit: dict[str, str]
    source: FibrationBundle
    target: FibrationBundle
    adjunction_ok: bool


def inverse_image_adjoint(cix: IndexedCategory, adj: Adjunction) -> InverseImage:
    """Inverse image of ``cix`` along the right adjoint, computed as the
    pullback along the left adjoint, with both comparison functors.

    q sends (x, d) to (x, L(d)); the comparison sends (x, c) to
    (fiber-restriction-along-counit(x), R(c)); their adjunction is verified
    through the triangle identities.
    """
    left, right = adj.left, adj.right
    if left.target != cix.base:
        raise StructureError("left adjoint must land in the indexed category's base")
    if not check_adjunction(left, right, adj.unit, adj.counit):
        raise StructureError("adjunction data invalid")
    di = direct_image(cix, left)
    pulled, q = di.indexed, di.q
    d_total, c_total = di.source, di.target
    base = cix.base
    obj_map = {}
    for name, (x, c) in c_total.obj_pair.items():
        obj_map[name] = pair_obj(cix.restriction[adj.counit[c]].ob(x), right.ob(c))
    arr_map = {}
    for name, (u, f) in c_total.arr_pair.items():
        o1, o2 = c_total.total.src[name], c_total.total.tgt[name]
        c1 = c_total.obj_pair[o1][1]
        v = cix.restriction[adj.counit[c1]].ar(u)
        arr_map[name] = pair_arr(v, right.ar(f), obj_map[o1], obj_map[o2])
    comparison = validate_functor(obj_map, arr_map, c_total.total, d_total.total)
    unit = {}
    for name, (x, d) in d_total.obj_pair.items():
        fib = pulled.fiber[d]
        unit[name] = pair_arr(fib.identity[x], adj.unit[d], name, comparison.ob(q.ob(name)))
    counit = {}
    for name, (x, c) in c_total.obj_pair.items():
        y = cix.restriction[adj.counit[c]].ob(x)
        counit[name] = pair_arr(cix.fiber[base.src[adj.counit[c]]].identity[y], adj.counit[c], q.ob(comparison.ob(name)), name)
    ok = check_adjunction(q, comparison, unit, counit)
    return InverseImage(pulled, q, comparison, unit, counit, d_total, c_total, ok)


def compose_adjunctions(inner: Adjunction, outer: Adjunction) -> Adjunction:
    """Compose L1 -| R1 (inner, nearer the base) with L2 -| R2: the composite
    is L1.L2 -| R2.R1."""
    l1, r1 = inner.left, inner.right
    l2, r2 = outer.left, outer.right
    if l2.target != l1.source:
        raise StructureError("adjunctions not composable")
    left = compose_functors(l1, l2)
    right = compose_functors(r2, r1)
    unit = {}
    for d in l2.source.objects:
        step = outer.unit[d]
        lifted = r2.ar(inner.unit[l2.ob(d)])
        unit[d] = l2.source.compose(lifted, step)
    counit = {}
    for c in l1.target.objects:
        step = l1.ar(outer.counit[r1.ob(c)])
        counit[c] = l1.target.compose(inner.counit[c], step)
    return Adjunction(left, right, unit, counit)


class NonComputableError(StructureError):
    """The requested base-change composite has no computable route here."""


@dataclass(frozen=True)
class BaseChangeComposition:
    mode: str
    equal: bool
    iso: dict[str, str] | None
    composite: FinFunctor
    direct: FinFunctor


def compose_direct_images(dix: IndexedCategory, f_inner: FinFunctor, f_outer: FinFunctor) -> BaseChangeComposition:
    """(dix o F') o F against dix o (F' o F): fiber tables must agree on the
    nose and the projections must compose exactly."""
    step_outer = direct_image(dix, f_outer)
    step_inner = direct_image(step_outer.indexed, f_inner)
    once = direct_image(dix, compose_functors(f_outer, f_inner))
    tables_equal = (
        once.indexed.fiber == step_inner.indexed.fiber
        and all(
            functor_equal(once.indexed.restriction[f], step_inner.indexed.restriction[f])
            for f in once.indexed.base.arrows
        )
    )
    composite = compose_functors(step_outer.q, step_inner.q)
    equal = tables_equal and functor_equal(composite, once.q)
    return BaseChangeComposition("direct", equal, None, composite, once.q)


def compose_inverse_images(cix: IndexedCategory, adj_inner: Adjunction, adj_outer: Adjunction) -> BaseChangeComposition:
    """Comparison functors compose against the composite adjunction's
    comparison; strictness makes the natural iso the identity, but a search
    is attempted when tables differ."""
    step1 = inverse_image_adjoint(cix, adj_inner)
    step2 = inverse_image_adjoint(step1.indexed, adj_outer)
    combined = inverse_image_adjoint(cix, compose_adjunctions(adj_inner, adj_outer))
    composite = compose_functors(step2.comparison, step1.comparison)
    if functor_equal(composite, combined.comparison):
        iso = {o: composite.target.identity[composite.ob(o)] for o in composite.source.objects}
        return BaseChangeComposition("inverse", True, iso, composite, combined.comparison)
    iso = natural_iso_search(composite, combined.comparison)
    return BaseChangeComposition("inverse", iso is not None, iso, composite, combined.comparison)


def compose_base_change(f_inner: FinFunctor, f_outer: FinFunctor, indexed: IndexedCategory, adj_inner: Adjunction | None = None, adj_outer: Adjunction | None = None) -> BaseChangeComposition:
    """Dispatch on where the indexed category lives; adjoint data is required
    for the inverse-image route and its absence is reported, never guessed."""
    if indexed.base == f_outer.target:
        return compose_direct_images(indexed, f_inner, f_outer)
    if indexed.base == f_inner.source:
        if adj_inner is None or adj_outer is None:
            raise NonComputableError("inverse-image composition needs adjoint data for both steps")
        return compose_inverse_images(indexed, adj_inner, adj_outer)
    raise StructureError("indexed category does not match either end of the composite")


# ---------------------------------------------------------------------------
# Cartesian fibrations and the structure functor


def is_cartesian_fibration(bundle: FibrationBundle) -> tuple[bool, tuple]:
    """Indexed formulation: every fiber has finite limits and every
    restriction functor preserves the found cones."""
    if bundle.indexed is None:
        raise StructureError("is_cartesian_fibration needs a grothendieck-built bundle")
    cix = bundle.indexed
    cones = {}
    for c in cix.base.objects:
        ok, witness, found = limits.finite_limits(cix.fiber[c])
        if not ok:
            return False, ("fiber", c) + witness
        cones[c] = found
    for f in cix.base.arrows:
        if cix.base.is_identity(f):
            continue
        ok, witness = limits.preserves_cones(cix.restriction[f], cones[cix.base.tgt[f]])
        if not ok:
            return False, ("restriction", f) + witness
    return True, ()


@dataclass(frozen=True)
class StructureFunctor:
    unit_leg: FinFunctor
    projection_leg: FinFunctor
    composite: FinFunctor
    middle: IndexedCategory
    inverse: InverseImage


def structure_functor(cix: IndexedCategory, adj: Adjunction) -> StructureFunctor:
    """The canonical functor from a total category to its inverse image's:
    the unit-induced functor into the pulled-back fibration followed by the
    pullback projection.  It coincides with the adjoint comparison functor.
    """
    inv = inverse_image_adjoint(cix, adj)
    mid = direct_image(inv.indexed, adj.right)
    middle, q_mid = mid.indexed, mid.q
    c_bundle = inv.target
    m_bundle = mid.source
    obj_map = {}
    for name, (x, c) in c_bundle.obj_pair.items():
        obj_map[name] = pair_obj(cix.restriction[adj.counit[c]].ob(x), c)
    arr_map = {}
    for name, (u, f) in c_bundle.arr_pair.items():
        o1, o2 = c_bundle.total.src[name], c_bundle.total.tgt[name]
        c1 = c_bundle.obj_pair[o1][1]
        arr_map[name] = pair_arr(cix.restriction[adj.counit[c1]].ar(u), f, obj_map[o1], obj_map[o2])
    zeta = validate_functor(obj_map, arr_map, c_bundle.total, m_bundle.total)
    composite = compose_functors(q_mid, zeta)
    return StructureFunctor(zeta, q_mid, composite, middle, inv)
