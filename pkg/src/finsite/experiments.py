"""Named, replayable experiment bundles over the corpus and seeded fuzzing.

Identical (id, seed, caps) triples yield byte-identical canonical reports;
wall time is kept off the canonical text.  Each experiment knows which
in-scope results it covers, and the release runner refuses to proceed when
the union misses one.
"""
from __future__ import annotations

import hashlib

import time
from dataclasses import dataclass, replace

from . import corpus
from .bundles import category_to_json, dumps_canonical, topology_to_json
from .deciders import (
    Prop33Square,
    SiteFunctor,
    check_prop33_conditions,
    is_comorphism,
    is_continuous,
    is_dense_morphism,
    is_morphism_of_sites,
)
from .fincat import (
    StructureError,
    comma_category,
    compose_functors,
    connected_components,
    constant_functor,
    functor_equal,
    identity_functor,
    identity_transform,
    is_equivalence,
    terminal_category,
    validate_functor,
)
from .fibration import (
    direct_image,
    compose_direct_images,
    compose_inverse_images,
    giraud_topology,
    grothendieck,
    inverse_image_adjoint,
    is_cartesian_fibration,
    is_fibration,
    is_morphism_of_fibrations,
    q_reflects_cartesian,
    structure_functor,
    total_functor,
)
from .generate import (
    Caps,
    GenerationError,
    derive_seed,
    describe_instance,
    gen_category,
    gen_functor,
    gen_galois,
    gen_indexed,
    gen_indexed_morphism,
    gen_presheaf,
    gen_site,
    gen_topology,
    generate_instance,
    min_comorphism_topology,
    pushforward_topology,
    shrink_site,
    _rng,
)
from . import limits
from .presheaf import (
    is_sheaf,
    precompose,
    sheaf_targets,
    sheafify,
    unit_universal_property,
    validate_presheaf,
)
from .sieves import (
    CapExceeded,
    coverage_of,
    enumerate_topologies,
    induced_image_topology,
    InducedTopologyError,
    is_topology,
    make_coverage,
    saturate,
    topology_candidate_count,
    topology_leq,
    trivial_topology,
)


class SkipInstance(Exception):
    """Raised by a check when the instance exceeds an exhaustive-search cap."""


@dataclass(frozen=True)
class Failure:
    label: str
    message: str
    instance: str
    minimized: str


@dataclass(frozen=True)
class Report:
    experiment: str
    seed: int
    caps: Caps
    checked: int
    skipped: int
    notes: tuple[str, ...]
    failures: tuple[Failure, ...]
    elapsed: float

    def canonical_text(self) -> str:
        lines = [
            "experiment {}".format(self.experiment),
            "seed {}".format(self.seed),
            "caps {}".format(self.caps.render()),
            "checked {}".format(self.checked),
            "skipped {}".format(self.skipped),
            "failures {}".format(len(self.failures)),
        ]
        for note in self.notes:
            lines.append("note {}".format(note))
        fail_block = []
        for i, f in enumerate(self.failures):
            fail_block.append("failure {} {}".format(i, f.label))
            fail_block.append("  message {}".format(f.message))
            fail_block.append("  instance {}".format(f.instance))
            fail_block.append("  minimized {}".format(f.minimized))
        lines.extend(fail_block)
        digest = hashlib.sha256("\n".join(fail_block).encode("utf-8")).hexdigest() if fail_block else "-"
        lines.append("--- trailer ---")
        lines.append("id={}".format(self.experiment))
        lines.append("seed={}".format(self.seed))
        lines.append("caps={}".format(self.caps.render()))
        lines.append("checked={}".format(self.checked))
        lines.append("skipped={}".format(self.skipped))
        lines.append("failures={}".format(len(self.failures)))
        lines.append("digest={}".format(digest))
        return "\n".join(lines) + "\n"

    def render(self, with_timing: bool = False) -> str:
        text = self.canonical_text()
        if with_timing:
            text += "# elapsed {:.2f}s (not part of the canonical report)\n".format(self.elapsed)
        return text

    @property
    def ok(self) -> bool:
        return not self.failures


def _digest_obj(obj) -> str:
    try:
        return dumps_canonical(obj)
    except TypeError:
        return repr(obj)


class _Run:
    """Accumulates per-instance outcomes for one experiment run."""

    def __init__(self, seed: int, caps: Caps):
        self.seed = seed
        self.caps = caps
        self.checked = 0
        self.skipped = 0
        self.notes: list[str] = []
        self.failures: list[Failure] = []

    def instance_seed(self, index: int) -> int:
        return derive_seed(self.seed, index)

    def check(self, label: str, instance_desc: str, outcome, minimized: str = ""):
        """outcome is None (pass) or a failure message."""
        self.checked += 1
        if outcome is not None:
            self.failures.append(Failure(label, str(outcome), instance_desc, minimized or instance_desc))

    def skip(self):
        self.skipped += 1

    def loop(self, make, check):
        """make(index) -> instance or raises; check(instance) -> None | message."""
        for i in range(self.caps.instances):
            try:
                inst = make(i)
            except (GenerationError, CapExceeded):
                self.skip()
                continue
            try:
                msg = check(inst)
            except SkipInstance:
                self.skip()
                continue
            self.check("fuzz[{}]".format(i), self._describe(inst), msg, self._minimize(inst, check, msg))

    @staticmethod
    def _describe(inst) -> str:
        if isinstance(inst, dict):
            return describe_instance(inst)
        return repr(inst)

    @staticmethod
    def _minimize(inst, check, msg) -> str:
        if msg is None:
            return ""
        if isinstance(inst, dict) and "category" in inst and "topology" in inst:
            def fails(cat, top):
                try:
                    cand = dict(inst)
                    cand.update(category=cat, topology=top)
                    return check(cand) is not None
                except Exception:
                    # a reduction that breaks dependent instance parts does not
                    # count as a preserved failure
                    return False

            cat, top = shrink_site(inst["category"], inst["topology"], fails)
            return _digest_obj({"category": category_to_json(cat), "topology": topology_to_json(top, "category")})
        if isinstance(inst, dict) and "indexed" in inst and "base_topology" in inst:
            from .generate import shrink_fibration

            def fails(cix, top):
                try:
                    cand = dict(inst)
                    cand.update(indexed=cix, base_topology=top)
                    return check(cand) is not None
                except Exception:
                    return False

            cix, top = shrink_fibration(inst["indexed"], inst["base_topology"], fails)
            sizes = {c: len(cix.fiber[c].objects) for c in cix.base.objects}
            return _digest_obj(
                {
                    "base": category_to_json(cix.base),
                    "fibers": {c: category_to_json(cix.fiber[c]) for c in sorted(sizes)},
                    "topology": topology_to_json(top, "base"),
                }
            )
        if isinstance(inst, dict):
            return describe_instance(inst)
        return repr(inst)


# ---------------------------------------------------------------------------
# Experiment bodies


def _exp_comma_kernel(run: _Run):
    def check_cat(cat):
        from .fincat import arrow_category

        ac = arrow_category(cat)
        ident = identity_functor(cat)
        cc = comma_category(ident, ident)
        obj_map = {}
        for name, (_, _, u) in cc.obj_data.items():
            obj_map[name] = ac.of_arrow[u]
        if sorted(obj_map.values()) != sorted(ac.category.objects):
            return "comma(Id,Id) object set differs from the arrow category"
        arr_map = {}
        for name, (w1, w2) in cc.arr_data.items():
            o1, o2 = cc.category.src[name], cc.category.tgt[name]
            arr_map[name] = "[{},{}]:{}->{}".format(w1, w2, obj_map[o1], obj_map[o2])
        try:
            iso = validate_functor(obj_map, arr_map, cc.category, ac.category)
        except StructureError as err:
            return "comma-to-arrow comparison is not a functor: {}".format(err)
        if sorted(arr_map.values()) != sorted(ac.category.arrows):
            return "comma(Id,Id) arrows differ from the arrow category"
        if not functor_equal(compose_functors(ac.dom, iso), cc.left):
            return "left projection disagrees with the domain functor"
        if not functor_equal(compose_functors(ac.cod, iso), cc.right):
            return "right projection disagrees with the codomain functor"
        neighbours = {c: set() for c in cat.objects}
        for a in cat.arrows:
            neighbours[cat.src[a]].add(cat.tgt[a])
            neighbours[cat.tgt[a]].add(cat.src[a])
        seen = set()
        groups = []
        for c in cat.objects:
            if c in seen:
                continue
            stack, group = [c], set()
            while stack:
                x = stack.pop()
                if x in group:
                    continue
                group.add(x)
                stack.extend(neighbours[x] - group)
            seen |= group
            groups.append(tuple(sorted(group)))
        if tuple(sorted(groups)) != tuple(sorted(connected_components(cat))):
            return "connected components disagree with graph reachability"
        from .sieves import elements_of_sieve, generate_sieve

        for c in cat.objects:
            for f in cat.into(c)[:3]:
                sieve = generate_sieve(cat, c, (f,))
                el = elements_of_sieve(sieve)
                if sorted(el.object_arrow.values()) != sorted(sieve.arrows):
                    return "elements of sieve missed an arrow"
                for name, arrow in el.object_arrow.items():
                    if el.projection.ob(name) != cat.src[arrow]:
                        return "sieve-elements projection is wrong"
        return None

    for name, cat, _ in corpus.corpus_sites():
        run.check(name, name, check_cat(cat))

    def make(i):
        cat, _, _ = gen_category(_rng(run.instance_seed(i)), run.caps)
        return {"kind": "category", "category": cat}

    run.loop(make, lambda inst: check_cat(inst["category"]))


def _exp_cartesian_characterisation(run: _Run):
    def check(inst):
        cix = inst["indexed"]
        bundle = grothendieck(cix)
        ok, witness = is_fibration(bundle, mode="strict")
        if not ok:
            return "grothendieck output missed a strict lift: {}".format(witness)
        ok, witness = is_fibration(bundle, mode="street")
        if not ok:
            return "grothendieck output missed a street lift: {}".format(witness)
        for name, (u, f) in bundle.arr_pair.items():
            c1 = bundle.obj_pair[bundle.total.src[name]][1]
            vertical_iso = cix.fiber[c1].is_iso(u)
            if vertical_iso != (name in bundle.cartesian):
                return "cartesian table disagrees with the vertical-iso characterisation at {}".format(name)
        return None

    run.check("twopoint", "twopoint", check({"indexed": corpus.two_point()}))

    def make(i):
        return generate_instance("fibration", run.instance_seed(i), run.caps)

    run.loop(make, check)


def _minimal_cover_coverage(topology):
    base = topology.base
    gens = {}
    for c in base.objects:
        sieves = topology.covers[c]
        minimal = [s for s in sieves if not any(t < s for t in sieves)]
        gens[c] = [sorted(s) for s in minimal]
    return make_coverage(base, gens)


def _exp_topology_soundness(run: _Run):
    def check(inst):
        cix = inst["indexed"]
        topology = inst["base_topology"]
        base = topology.base
        ok, witness = is_topology(base, topology.covers)
        if not ok:
            return "saturate output fails {}".format(witness)
        again = saturate(coverage_of(topology))
        if again != topology:
            return "saturate is not idempotent"
        gir = giraud_topology(cix, topology)
        ok, witness = is_topology(gir.base, gir.covers)
        if not ok:
            return "giraud output fails {}".format(witness)
        ident = identity_functor(base)
        if induced_image_topology(ident, topology) != topology:
            return "induced topology along the identity is not the identity"
        if len(base.objects) <= 3:
            from .sieves import generate_sieve

            cov = _minimal_cover_coverage(topology)
            if topology_candidate_count(base) > run.caps.enumeration_limit:
                raise SkipInstance()
            try:
                for other in enumerate_topologies(base):
                    gens_in = all(
                        other.is_cover(c, generate_sieve(base, c, sorted(fam)).arrows)
                        for c in cov.generators
                        for fam in cov.generators[c]
                    )
                    if gens_in and not topology_leq(topology, other):
                        return "saturation is not minimal among topologies containing the generators"
            except CapExceeded:
                raise SkipInstance()
        return None

    for name, cat, top in corpus.corpus_sites():
        cix = corpus.two_point(cat) if cat == corpus.walk2() else None
        if cix is None:
            from .fibration import validate_indexed

            one_fib = terminal_category()
            cix = validate_indexed(
                cat,
                {c: one_fib for c in cat.objects},
                {f: identity_functor(one_fib) for f in cat.arrows if not cat.is_identity(f)},
            )
        run.check(name, name, check({"indexed": cix, "base_topology": top}))

    def make(i):
        return generate_instance("fibration", run.instance_seed(i), run.caps)

    run.loop(make, check)


def _exp_minimality(run: _Run):
    small = replace(run.caps, base_objects=min(3, run.caps.base_objects), fiber_objects=min(2, run.caps.fiber_objects))

    def check(inst):
        cix = inst["indexed"]
        topology = inst["base_topology"]
        bundle = grothendieck(cix)
        total = bundle.total
        if topology_candidate_count(total) > run.caps.enumeration_limit:
            raise SkipInstance()
        gir = giraud_topology(cix, topology, bundle)
        try:
            for candidate in enumerate_topologies(total):
                passes = is_comorphism(SiteFunctor(bundle.projection, candidate, topology)).ok
                above = topology_leq(gir, candidate)
                if passes != above:
                    return "comorphism topologies are not exactly the up-set of the Giraud topology at {}".format(
                        sorted(map(sorted, candidate.covers[total.objects[0]]))
                    )
        except CapExceeded:
            raise SkipInstance()
        return None

    run.check("twopoint-sier", "twopoint-sier", check({"indexed": corpus.two_point(), "base_topology": corpus.sier()}))

    def make(i):
        return generate_instance("fibration", run.instance_seed(i), small)

    run.loop(make, check)


def _exp_continuity(run: _Run):
    def check(inst):
        cix = inst["indexed"]
        topology = inst["base_topology"]
        bundle = grothendieck(cix)
        gir = giraud_topology(cix, topology, bundle)
        site = SiteFunctor(bundle.projection, gir, topology)
        v = is_comorphism(site)
        if not v.ok:
            return "giraud projection is not a comorphism: {}".format(v.witness)
        v = is_continuous(site)
        if not v.ok:
            return "giraud projection is not continuous: {}".format(v.witness)
        morphism = inst["morphism"]
        src_bundle = grothendieck(morphism.source)
        tgt_bundle = grothendieck(morphism.target)
        top_fun = total_functor(morphism, src_bundle, tgt_bundle)
        ident = identity_functor(cix.base)
        square = identity_transform(compose_functors(ident, src_bundle.projection))
        ok, witness = is_morphism_of_fibrations(top_fun, ident, src_bundle, tgt_bundle, square)
        if not ok:
            return "indexed morphism is not a morphism of fibrations: {}".format(witness)
        gir_src = giraud_topology(morphism.source, topology, src_bundle)
        gir_tgt = giraud_topology(morphism.target, topology, tgt_bundle)
        v = is_continuous(SiteFunctor(top_fun, gir_src, gir_tgt))
        if not v.ok:
            return "morphism of fibrations is not continuous between Giraud sites: {}".format(v.witness)
        return None

    tp = corpus.two_point()
    morphism = _collapse_morphism(tp)
    run.check("twopoint", "twopoint", check({"indexed": tp, "base_topology": corpus.sier(), "morphism": morphism}))

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects), fiber_objects=min(3, run.caps.fiber_objects))
        cat, topology, kind, meta = gen_site(rng, caps)
        cix = gen_indexed(rng, cat, caps, kind, meta)
        morphism = gen_indexed_morphism(rng, cix, caps)
        return {"kind": "fibration", "indexed": morphism.source, "base_topology": topology, "morphism": morphism}

    run.loop(make, check)


def _collapse_morphism(cix):
    from .fibration import validate_indexed, validate_indexed_morphism

    one_fib = terminal_category()
    base = cix.base
    target = validate_indexed(
        base,
        {c: one_fib for c in base.objects},
        {f: identity_functor(one_fib) for f in base.arrows if not base.is_identity(f)},
    )
    comps = {c: constant_functor(cix.fiber[c], one_fib, "*") for c in base.objects}
    return validate_indexed_morphism(cix, target, comps)


def _exp_reflect_cartesian(run: _Run):
    def check(inst):
        di = direct_image(inst["indexed"], inst["functor"])
        ok, witness = q_reflects_cartesian(di)
        if not ok:
            return "projection fails to reflect cartesian arrows: {}".format(witness)
        square = identity_transform(compose_functors(inst["functor"], di.source.projection))
        ok, witness = is_morphism_of_fibrations(di.q, inst["functor"], di.source, di.target, square)
        if not ok:
            return "projection is not a morphism of fibrations: {}".format(witness)
        for c in di.indexed.base.objects:
            if di.indexed.fiber[c] != inst["indexed"].fiber[inst["functor"].ob(c)]:
                return "pullback fiber table is not exact at {}".format(c)
        return None

    tp = corpus.two_point()
    run.check(
        "twopoint-pick-b",
        "twopoint-pick-b",
        check({"indexed": tp, "functor": corpus.pick(corpus.walk2(), "b")}),
    )

    def make(i):
        rng = _rng(run.instance_seed(i))
        cat, _, kind, meta = gen_site(rng, run.caps)
        dix = gen_indexed(rng, cat, run.caps, kind, meta)
        src, _, _, _ = gen_site(rng, replace(run.caps, base_objects=min(3, run.caps.base_objects)))
        fn = gen_functor(rng, src, cat)
        if fn is None:
            raise GenerationError("no functor")
        return {"kind": "direct-image", "indexed": dix, "functor": fn}

    run.loop(make, check)


def _exp_adjoint_agreement(run: _Run):
    def check(inst):
        adj = inst["adjunction"]
        cix = inst["indexed"]
        inv = inverse_image_adjoint(cix, adj)
        if not inv.adjunction_ok:
            return "comparison adjunction failed the triangle identities"
        stf = structure_functor(cix, adj)
        if not functor_equal(stf.composite, inv.comparison):
            return "structure functor disagrees with the adjoint comparison"
        one = terminal_category()
        dcat = adj.left.source
        for d in dcat.objects:
            comma = comma_category(constant_functor(one, dcat, d), adj.right)
            cat = comma.category
            initial = [
                o for o in cat.objects if all(len(cat.hom(o, other)) == 1 for other in cat.objects)
            ]
            if not initial:
                return "comma category (d over right adjoint) has no initial object at {}".format(d)
            c0 = comma.obj_data[initial[0]][1]
            target_obj = None
            for name, (_, c, u) in comma.obj_data.items():
                if c == adj.left.ob(d) and u == adj.unit[d]:
                    target_obj = name
                    break
            if target_obj is None:
                return "unit object missing from the comma category at {}".format(d)
            arrows = cat.hom(initial[0], target_obj)
            if len(arrows) != 1:
                return "initial object not strict at {}".format(d)
            w = comma.arr_data[arrows[0]][1]
            comparison = cix.restriction[w]
            ok, witness = is_equivalence(comparison)
            if not ok:
                return "pointwise comma-colimit disagrees with the adjoint inverse image at {}: {}".format(d, witness[0])
        return None

    adj = corpus.walk2_terminal_adjunction()
    from .fibration import validate_indexed

    fib = corpus.discrete(("p", "q"))
    cix = validate_indexed(corpus.one(), {"*": fib}, {})
    run.check("walk2-terminal", "walk2-terminal", check({"adjunction": adj, "indexed": cix}))

    def make(i):
        rng = _rng(run.instance_seed(i))
        adj = gen_galois(rng, run.caps)
        if adj is None:
            raise GenerationError("no galois connection")
        cix = gen_indexed(rng, adj.left.target, run.caps)
        return {"kind": "adjoint-pair", "adjunction": adj, "indexed": cix}

    run.loop(make, check)


def _continuous_site_functor(rng, caps):
    """A site functor that is continuous by construction (identity, or a
    trivially-topologised source)."""
    roll = rng.random()
    if roll < 0.3:
        cat, topology, _, _ = gen_site(rng, caps)
        return SiteFunctor(identity_functor(cat), topology, topology)
    src, _, _, _ = gen_site(rng, replace(caps, base_objects=min(3, caps.base_objects)))
    tgt, tgt_top, _, _ = gen_site(rng, caps)
    fn = gen_functor(rng, src, tgt)
    if fn is None:
        raise GenerationError("no functor for a continuous instance")
    return SiteFunctor(fn, trivial_topology(src), tgt_top)


def _exp_prop34(run: _Run):
    def check(inst):
        sf = inst["site_functor"]
        pre = is_continuous(sf)
        if not pre.ok:
            raise SkipInstance()
        cix = inst["indexed"]
        di = direct_image(cix, sf.functor)
        gir_src = giraud_topology(di.indexed, sf.source_topology, di.source)
        gir_tgt = giraud_topology(cix, sf.target_topology, di.target)
        v = is_continuous(SiteFunctor(di.q, gir_src, gir_tgt))
        if not v.ok:
            return "direct-image projection of a continuous functor is not continuous: {}".format(v.witness)
        return None

    w = corpus.walk2()
    run.check(
        "walk2-id",
        "walk2-id",
        check({"site_functor": SiteFunctor(identity_functor(w), corpus.sier(w), corpus.sier(w)), "indexed": corpus.two_point(w)}),
    )

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects), fiber_objects=min(2, run.caps.fiber_objects))
        sf = _continuous_site_functor(rng, caps)
        cix = gen_indexed(rng, sf.functor.target, caps)
        return {"kind": "prop34", "site_functor": sf, "indexed": cix}

    run.loop(make, check)


def _exp_prop42(run: _Run):
    def check(inst):
        sf = inst["site_functor"]
        pre = is_comorphism(sf)
        if not pre.ok:
            return "constructed comorphism fails its own check: {}".format(pre.witness)
        cix = inst["indexed"]
        di = direct_image(cix, sf.functor)
        gir_src = giraud_topology(di.indexed, sf.source_topology, di.source)
        gir_tgt = giraud_topology(cix, sf.target_topology, di.target)
        v = is_comorphism(SiteFunctor(di.q, gir_src, gir_tgt))
        if not v.ok:
            return "direct-image projection of a comorphism is not a comorphism: {}".format(v.witness)
        return None

    w = corpus.walk2()
    run.check(
        "walk2-id",
        "walk2-id",
        check({"site_functor": SiteFunctor(identity_functor(w), corpus.sier(w), corpus.sier(w)), "indexed": corpus.two_point(w)}),
    )

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects), fiber_objects=min(2, run.caps.fiber_objects))
        tgt, tgt_top, _, _ = gen_site(rng, caps)
        src, _, _, _ = gen_site(rng, caps)
        fn = gen_functor(rng, src, tgt)
        if fn is None:
            raise GenerationError("no functor")
        sf = SiteFunctor(fn, min_comorphism_topology(fn, tgt_top), tgt_top)
        cix = gen_indexed(rng, tgt, caps)
        return {"kind": "comorphism", "site_functor": sf, "indexed": cix}

    run.loop(make, check)


def _exp_dense(run: _Run):
    def check(inst):
        sf = inst["site_functor"]
        pre = is_dense_morphism(sf)
        if not pre.ok:
            return "constructed dense inclusion fails the dense check: {}".format(pre.witness)
        cix = inst["indexed"]
        di = direct_image(cix, sf.functor)
        gir_src = giraud_topology(di.indexed, sf.source_topology, di.source)
        gir_tgt = giraud_topology(cix, sf.target_topology, di.target)
        v = is_dense_morphism(SiteFunctor(di.q, gir_src, gir_tgt))
        if not v.ok:
            return "direct-image projection along a dense morphism is not dense: {}".format(v.witness)
        return None

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects), fiber_objects=min(2, run.caps.fiber_objects))
        inst = generate_instance("dense-pair", run.instance_seed(i), caps)
        sf = SiteFunctor(inst["functor"], inst["source_topology"], inst["target_topology"])
        cix = gen_indexed(rng, sf.functor.target, caps)
        return {"kind": "dense-pair", "site_functor": sf, "indexed": cix}

    w = corpus.walk2()
    full = validate_functor({c: c for c in w.objects}, {a: a for a in w.arrows}, w, w)
    run.check(
        "walk2-full",
        "walk2-full",
        check({"site_functor": SiteFunctor(full, corpus.sier(w), corpus.sier(w)), "indexed": corpus.two_point(w)}),
    )
    run.loop(make, check)


def _exp_prop44(run: _Run):
    def check(inst):
        if inst["flavor"] == "direct":
            result = compose_direct_images(inst["indexed"], inst["inner"], inst["outer"])
            if not result.equal:
                return "direct-image composition is not table-exact"
            return None
        result = compose_inverse_images(inst["indexed"], inst["adj_inner"], inst["adj_outer"])
        if not result.equal:
            return "inverse-image comparison composite has no natural isomorphism"
        return None

    w = corpus.walk2()
    one = corpus.one()
    run.check(
        "walk2-pick-id",
        "walk2-pick-id",
        check(
            {
                "flavor": "direct",
                "indexed": corpus.two_point(w),
                "inner": identity_functor(one),
                "outer": corpus.pick(w, "b"),
            }
        ),
    )

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects))
        if rng.random() < 0.5:
            top_cat, _, kind, meta = gen_site(rng, caps)
            dix = gen_indexed(rng, top_cat, caps, kind, meta)
            mid, _, _, _ = gen_site(rng, caps)
            outer = gen_functor(rng, mid, top_cat)
            src, _, _, _ = gen_site(rng, caps)
            inner = gen_functor(rng, src, mid) if outer is not None else None
            if outer is None or inner is None:
                raise GenerationError("no functor chain")
            return {"kind": "prop44", "flavor": "direct", "indexed": dix, "inner": inner, "outer": outer}
        adj_inner = gen_galois(rng, caps)
        if adj_inner is None:
            raise GenerationError("no inner galois")
        adj_outer = gen_galois_into(rng, caps, adj_inner.left.source)
        if adj_outer is None:
            raise GenerationError("no outer galois")
        base = adj_inner.left.target
        if rng.random() < 0.5:
            cix = gen_indexed(rng, base, caps)
        else:
            from .generate import representable_indexed

            cix = representable_indexed(base, rng.choice(list(base.objects)))
        return {"kind": "prop44", "flavor": "adjoint", "indexed": cix, "adj_inner": adj_inner, "adj_outer": adj_outer}

    run.loop(make, check)


def gen_galois_into(rng, caps, target):
    """A Galois connection whose lower adjoint lands in the given poset."""
    from .generate import gen_poset, _poset_leq, _poset_functor, _poset_arrow
    from .fincat import validate_adjunction

    for _ in range(40):
        p = gen_poset(rng, caps.base_objects)
        obj_map = {x: rng.choice(list(target.objects)) for x in p.objects}
        if not all(
            _poset_leq(target, obj_map[x], obj_map[y])
            for x in p.objects
            for y in p.objects
            if _poset_leq(p, x, y)
        ):
            continue
        right_map = {}
        ok = True
        for qo in target.objects:
            below = [x for x in p.objects if _poset_leq(target, obj_map[x], qo)]
            tops = [x for x in below if all(_poset_leq(p, y, x) for y in below)]
            if len(tops) != 1:
                ok = False
                break
            right_map[qo] = tops[0]
        if not ok:
            continue
        if not all(
            _poset_leq(target, obj_map[x], qo) == _poset_leq(p, x, right_map[qo])
            for x in p.objects
            for qo in target.objects
        ):
            continue
        if not all(
            _poset_leq(p, right_map[a], right_map[b])
            for a in target.objects
            for b in target.objects
            if _poset_leq(target, a, b)
        ):
            continue
        left = _poset_functor(obj_map, p, target)
        right = _poset_functor(right_map, target, p)
        unit = {x: _poset_arrow(p, x, right_map[obj_map[x]]) for x in p.objects}
        counit = {qo: _poset_arrow(target, obj_map[right_map[qo]], qo) for qo in target.objects}
        try:
            return validate_adjunction(left, right, unit, counit)
        except StructureError:
            continue
    return None


def _exp_sheafify(run: _Run):
    def check(inst):
        p = inst["presheaf"]
        topology = inst["topology"]
        sh = sheafify(p, topology)
        ok, witness = is_sheaf(sh.sheaf, topology)
        if not ok:
            return "sheafification output is not a sheaf: {}".format(witness)
        again = sheafify(sh.sheaf, topology)
        for c in p.base.objects:
            comp = again.unit[c]
            if sorted(comp.values()) != sorted(set(comp.values())) or len(set(comp.values())) != len(sh.sheaf.values[c]):
                return "sheafifying a sheaf did not give an isomorphic unit at {}".format(c)
        if inst.get("expect_singleton"):
            if any(len(sh.sheaf.values[c]) != 1 for c in p.base.objects):
                return "worked example did not collapse to the constant singleton sheaf"
        if inst.get("universal", True):
            try:
                targets = list(sheaf_targets(p.base, topology, run.caps.value_size, run.caps.sheaf_budget))
            except CapExceeded:
                targets = None
            if targets is not None:
                for q in targets:
                    ok, witness = unit_universal_property(p, topology, q)
                    if not ok:
                        return "unit universal property fails: {}".format(witness)
                run.notes_up += 1
        return None

    run.notes_up = 0
    w = corpus.walk2()
    worked = validate_presheaf(w, {"b": ("0", "1"), "a": ("*",)}, {"u": {"0": "*", "1": "*"}})
    run.check("walk2-worked", "walk2-worked", check({"presheaf": worked, "topology": corpus.sier(w), "expect_singleton": True}))

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(2, run.caps.base_objects))
        cat, topology, _, _ = gen_site(rng, caps)
        p = gen_presheaf(rng, cat, run.caps.value_size)
        return {"kind": "sheafify", "presheaf": p, "topology": topology}

    run.loop(make, check)
    run.notes.append("universal-property-instances {}".format(run.notes_up))


def _exp_cross_check(run: _Run):
    def check(inst):
        sf = SiteFunctor(inst["functor"], inst["source_topology"], inst["target_topology"])
        v = is_continuous(sf)
        if not v.ok:
            return None
        try:
            targets = list(sheaf_targets(sf.functor.target, sf.target_topology, run.caps.value_size, run.caps.sheaf_budget))
        except CapExceeded:
            raise SkipInstance()
        for q in targets:
            restricted = precompose(q, sf.functor)
            ok, witness = is_sheaf(restricted, sf.source_topology)
            if not ok:
                return "continuous functor failed to preserve a sheaf: {}".format(witness)
        run.notes_continuous += 1
        return None

    run.notes_continuous = 0
    w = corpus.walk2()
    run.check(
        "walk2-bang",
        "walk2-bang",
        check(
            {
                "functor": corpus.bang(w),
                "source_topology": corpus.sier(w),
                "target_topology": trivial_topology(corpus.one()),
            }
        ),
    )

    def make(i):
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects))
        return generate_instance("site-functor", run.instance_seed(i), caps)

    run.loop(make, check)
    run.notes.append("continuous-instances {}".format(run.notes_continuous))


def _exp_prop24(run: _Run):
    def check(inst):
        dense_sf = inst["dense"]
        f_prime = inst["functor"]
        direct = is_continuous(SiteFunctor(f_prime, inst["source_topology"], dense_sf.source_topology))
        composed = is_continuous(
            SiteFunctor(
                compose_functors(dense_sf.functor, f_prime), inst["source_topology"], dense_sf.target_topology
            )
        )
        if direct.ok != composed.ok:
            return "continuity through a dense morphism disagrees: direct={} composed={}".format(direct.ok, composed.ok)
        return None

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects))
        inst = generate_instance("dense-pair", run.instance_seed(i), caps)
        dense_sf = SiteFunctor(inst["functor"], inst["source_topology"], inst["target_topology"])
        src, src_top, _, _ = gen_site(rng, caps)
        fn = gen_functor(rng, src, dense_sf.functor.source)
        if fn is None:
            raise GenerationError("no functor into the dense source")
        return {"kind": "prop24", "dense": dense_sf, "functor": fn, "source_topology": src_top}

    run.loop(make, check)


def _exp_prop33(run: _Run):
    def check(inst):
        square = inst["square"]
        v = check_prop33_conditions(square)
        if not v.ok:
            return "comparison conditions fail: {}".format(v.witness)
        return None

    def build_fixed(morphism, topology):
        src_bundle = grothendieck(morphism.source)
        tgt_bundle = grothendieck(morphism.target)
        a_fun = total_functor(morphism, src_bundle, tgt_bundle)
        gir_tgt = giraud_topology(morphism.target, topology, tgt_bundle)
        phi = identity_transform(compose_functors(tgt_bundle.projection, a_fun))
        return Prop33Square(
            a_fun,
            identity_functor(topology.base),
            phi,
            tgt_bundle.projection,
            src_bundle.projection,
            gir_tgt,
        )

    tp = corpus.two_point()
    run.check(
        "twopoint-collapse",
        "twopoint-collapse",
        check({"square": build_fixed(_collapse_morphism(tp), corpus.sier())}),
    )

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(2, run.caps.base_objects), fiber_objects=min(2, run.caps.fiber_objects))
        cat, topology, kind, meta = gen_site(rng, caps)
        cix = gen_indexed(rng, cat, caps, kind, meta)
        morphism = gen_indexed_morphism(rng, cix, caps)
        return {"kind": "prop33-square", "square": build_fixed(morphism, topology)}

    run.loop(make, check)


def _exp_prop29(run: _Run):
    def check(inst):
        dix = inst["indexed"]
        fn = inst["functor"]
        tgt_bundle = grothendieck(dix)
        ok, witness = is_cartesian_fibration(tgt_bundle)
        if not ok:
            return "cartesian input is not a cartesian fibration: {}".format(witness)
        di = direct_image(dix, fn)
        ok, witness = is_cartesian_fibration(di.source)
        if not ok:
            return "direct image lost the cartesian structure: {}".format(witness)
        ok, witness = limits.reflects_limits_jointly(di.q, di.source.projection)
        if not ok:
            return "projection failed to reflect a limit cone: {}".format(witness)
        return None

    def make(i):
        # Reflection needs the stated hypotheses: bases with finite limits and
        # a limit-preserving base functor.  Chains supply both cheaply.
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects), fiber_objects=min(3, run.caps.fiber_objects))
        from .generate import _chain, _chain_map, graded_chain_indexed

        tgt_size = rng.randint(1, caps.base_objects)
        src_size = rng.randint(1, caps.base_objects)
        tgt = _chain(tgt_size, "d")
        src = _chain(src_size, "c")
        fn = _chain_map(rng, src_size, tgt_size, src, tgt)
        dix = graded_chain_indexed(rng, tgt, caps.fiber_objects)
        return {"kind": "prop29", "indexed": dix, "functor": fn}

    one = corpus.one()
    from .fibration import validate_indexed

    chain = corpus.discrete(("t",))
    cix = validate_indexed(one, {"*": chain}, {})
    run.check("one-point", "one-point", check({"indexed": cix, "functor": identity_functor(one)}))
    run.loop(make, check)


def _exp_prop412(run: _Run):
    def check(inst):
        morphism = inst["morphism"]
        topology = inst["base_topology"]
        src_bundle = grothendieck(morphism.source)
        tgt_bundle = grothendieck(morphism.target)
        a_fun = total_functor(morphism, src_bundle, tgt_bundle)
        gir_src = giraud_topology(morphism.source, topology, src_bundle)
        gir_tgt = giraud_topology(morphism.target, topology, tgt_bundle)
        enlarged = inst["extra"]
        target_topology = gir_tgt if enlarged is None else enlarged
        if not topology_leq(gir_tgt, target_topology):
            return "constructed target topology does not contain the Giraud topology"
        try:
            induced = induced_image_topology(a_fun, target_topology)
        except InducedTopologyError:
            raise SkipInstance()
        if not topology_leq(gir_src, induced):
            return "induced topology does not contain the Giraud topology"
        return None

    tp = corpus.two_point()
    run.check(
        "twopoint-collapse",
        "twopoint-collapse",
        check({"morphism": _collapse_morphism(tp), "base_topology": corpus.sier(), "extra": None}),
    )

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects), fiber_objects=min(2, run.caps.fiber_objects))
        cat, topology, kind, meta = gen_site(rng, caps)
        cix = gen_indexed(rng, cat, caps, kind, meta)
        morphism = gen_indexed_morphism(rng, cix, caps)
        extra = None
        if rng.random() < 0.4:
            tgt_bundle = grothendieck(morphism.target)
            gir_tgt = giraud_topology(morphism.target, topology, tgt_bundle)
            gens = {c: [sorted(s) for s in gir_tgt.covers[c]] for c in tgt_bundle.total.objects}
            for c in tgt_bundle.total.objects:
                if rng.random() < 0.4:
                    into = sorted(tgt_bundle.total.into(c))
                    gens[c].append(rng.sample(into, rng.randint(0, min(2, len(into)))))
            extra = saturate(make_coverage(tgt_bundle.total, gens))
        return {"kind": "prop412", "morphism": morphism, "base_topology": topology, "extra": extra}

    run.loop(make, check)


def _exp_structure(run: _Run):
    def check(inst):
        adj = inst["adjunction"]
        cix = inst["indexed"]
        base_topology = inst["base_topology"]
        target_topology = inst["target_topology"]
        stf = structure_functor(cix, adj)
        if not functor_equal(stf.composite, stf.inverse.comparison):
            return "structure functor is not the unit-then-projection composite"
        pre = is_morphism_of_sites(
            SiteFunctor(adj.right, base_topology, target_topology)
        )
        if not pre.ok:
            return "right adjoint is not a morphism of sites under the pushforward topology: {}".format(pre.witness)
        gir_src = giraud_topology(cix, base_topology)
        gir_tgt = giraud_topology(stf.inverse.indexed, target_topology)
        v = is_morphism_of_sites(SiteFunctor(stf.composite, gir_src, gir_tgt))
        if not v.ok:
            return "structure functor is not a morphism of sites: {}".format(v.witness)
        return None

    adj = corpus.walk2_terminal_adjunction()
    from .fibration import validate_indexed

    fib = corpus.discrete(("p", "q"))
    cix = validate_indexed(corpus.one(), {"*": fib}, {})
    j = trivial_topology(corpus.one())
    run.check(
        "walk2-terminal",
        "walk2-terminal",
        check(
            {
                "adjunction": adj,
                "indexed": cix,
                "base_topology": j,
                "target_topology": pushforward_topology(adj.right, j),
            }
        ),
    )

    def make(i):
        rng = _rng(run.instance_seed(i))
        caps = replace(run.caps, base_objects=min(3, run.caps.base_objects), fiber_objects=min(2, run.caps.fiber_objects))
        adj = gen_galois(rng, caps)
        if adj is None:
            raise GenerationError("no galois connection")
        cix = gen_indexed(rng, adj.left.target, caps)
        base_topology = gen_topology(rng, adj.left.target)
        target_topology = pushforward_topology(adj.right, base_topology, rng)
        return {
            "kind": "structure",
            "adjunction": adj,
            "indexed": cix,
            "base_topology": base_topology,
            "target_topology": target_topology,
        }

    run.loop(make, check)


@dataclass(frozen=True)
class ExperimentSpec:
    fn: object
    description: str
    tags: tuple[str, ...]


IN_SCOPE_TAGS = (
    "sec-2.1-comma",
    "def-2.2",
    "def-2.3",
    "def-2.4",
    "def-2.5",
    "def-2.6",
    "def-2.7",
    "comorphism-condition",
    "def-2.9-prop-2.2",
    "prop-2.4",
    "def-2.10",
    "prop-2.5",
    "prop-2.7",
    "def-2.12",
    "prop-2.9",
    "prop-3.3-iii",
    "prop-3.4",
    "prop-4.2",
    "prop-4.4",
    "prop-4.6",
    "remark-4.1b",
    "sec-4.3-structure",
    "prop-4.11",
    "prop-4.12-containment",
)


EXPERIMENTS: dict[str, ExperimentSpec] = {
    "comma-kernel": ExperimentSpec(
        _exp_comma_kernel,
        "comma categories vs the arrow-category and graph-reachability oracles",
        ("sec-2.1-comma",),
    ),
    "def-2.2-cartesian": ExperimentSpec(
        _exp_cartesian_characterisation,
        "grothendieck outputs are fibrations; cartesian arrows are the vertical isos",
        ("def-2.2",),
    ),
    "topology-soundness": ExperimentSpec(
        _exp_topology_soundness,
        "saturate/giraud/induced outputs satisfy the axioms; saturation idempotent and minimal",
        ("def-2.5", "prop-4.11"),
    ),
    "def-2.5-minimality": ExperimentSpec(
        _exp_minimality,
        "comorphism topologies on the total category are exactly the up-set of the Giraud topology",
        ("def-2.5", "def-2.6", "def-2.7", "comorphism-condition"),
    ),
    "thm-2.3-continuity": ExperimentSpec(
        _exp_continuity,
        "giraud projections are continuous comorphisms; fibration morphisms are continuous",
        ("def-2.3", "def-2.4", "def-2.9-prop-2.2", "def-2.5"),
    ),
    "prop-2.5-reflect": ExperimentSpec(
        _exp_reflect_cartesian,
        "pullback projections reflect cartesian arrows and are morphisms of fibrations",
        ("prop-2.5", "def-2.10"),
    ),
    "prop-2.7-agreement": ExperimentSpec(
        _exp_adjoint_agreement,
        "adjoint-route inverse images agree with the pointwise comma-colimit oracle",
        ("prop-2.7", "remark-4.1b"),
    ),
    "prop-3.4-continuous": ExperimentSpec(
        _exp_prop34,
        "direct-image projections of continuous functors are continuous between Giraud sites",
        ("prop-3.4",),
    ),
    "prop-4.2-comorphism": ExperimentSpec(
        _exp_prop42,
        "direct-image projections of comorphisms are comorphisms between Giraud sites",
        ("prop-4.2",),
    ),
    "prop-4.6-dense": ExperimentSpec(
        _exp_dense,
        "direct-image projections along dense morphisms are dense between Giraud sites",
        ("prop-4.6",),
    ),
    "prop-4.4-compose": ExperimentSpec(
        _exp_prop44,
        "base-change comparisons compose: table-exact direct images, iso adjoint comparisons",
        ("prop-4.4",),
    ),
    "sheafify-soundness": ExperimentSpec(
        _exp_sheafify,
        "double plus yields sheaves, is idempotent, and satisfies the unit universal property",
        (),
    ),
    "continuity-cross-check": ExperimentSpec(
        _exp_cross_check,
        "continuity implies precomposition preserves all bounded sheaves",
        ("def-2.9-prop-2.2",),
    ),
    "prop-2.4-triangle": ExperimentSpec(
        _exp_prop24,
        "continuity through a dense morphism of sites is equivalent to continuity",
        ("prop-2.4",),
    ),
    "prop-3.3-conditions": ExperimentSpec(
        _exp_prop33,
        "fixed-base morphisms of fibrations satisfy both comparison conditions",
        ("prop-3.3-iii",),
    ),
    "prop-2.9-cartesian": ExperimentSpec(
        _exp_prop29,
        "direct images preserve cartesian fibrations and projections reflect limit cones",
        ("def-2.12", "prop-2.9"),
    ),
    "prop-4.12-containment": ExperimentSpec(
        _exp_prop412,
        "induced topologies along fibration morphisms contain the Giraud topology",
        ("prop-4.12-containment", "prop-4.11"),
    ),
    "structure-functor-sites": ExperimentSpec(
        _exp_structure,
        "the unit-then-projection structure functor is a morphism of sites",
        ("sec-4.3-structure",),
    ),
}


EXPERIMENT_ALIASES = {
    "def-2.2": "def-2.2-cartesian",
    "thm-2.3": "thm-2.3-continuity",
    "prop-2.4": "prop-2.4-triangle",
    "prop-2.5": "prop-2.5-reflect",
    "prop-2.7": "prop-2.7-agreement",
    "prop-2.9": "prop-2.9-cartesian",
    "prop-3.3": "prop-3.3-conditions",
    "prop-3.4": "prop-3.4-continuous",
    "prop-4.2": "prop-4.2-comorphism",
    "prop-4.4": "prop-4.4-compose",
    "prop-4.6": "prop-4.6-dense",
    "prop-4.12": "prop-4.12-containment",
}


def resolve_experiment_id(experiment_id: str) -> str:
    return EXPERIMENT_ALIASES.get(experiment_id, experiment_id)


def coverage_gaps() -> tuple[str, ...]:
    covered = set()
    for entry in EXPERIMENTS.values():
        covered.update(entry.tags)
    return tuple(tag for tag in IN_SCOPE_TAGS if tag not in covered)


def all_experiment_ids() -> tuple[str, ...]:
    return tuple(sorted(EXPERIMENTS))


def run_experiment(experiment_id: str, seed: int = 0, caps: Caps | None = None) -> Report:
    experiment_id = resolve_experiment_id(experiment_id)
    if experiment_id not in EXPERIMENTS:
        raise KeyError("unknown experiment id {!r}".format(experiment_id))
    caps = caps or Caps()
    entry = EXPERIMENTS[experiment_id]
    run = _Run(seed, caps)
    start = time.perf_counter()
    entry.fn(run)
    elapsed = time.perf_counter() - start
    return Report(
        experiment_id,
        seed,
        caps,
        run.checked,
        run.skipped,
        tuple(run.notes),
        tuple(run.failures),
        elapsed,
    )
