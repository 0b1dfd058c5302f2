"""Deciders for functor classes between finite sites.

Every "there exists a covering family such that each member ..." condition
is decided by computing the sieve of qualifying arrows (the qualifying set
is always precomposition-closed) and testing membership in the saturated
cover set, which is upward closed.  Verdicts carry replayable witnesses:
a negative witness re-fails its condition, a positive trace re-verifies.
"""
from __future__ import annotations

from dataclasses import dataclass

from .fincat import (
    FinFunctor,
    NatTransform,
    StructureError,
    comma_category,
    compose_functors,
    connected_components,
    constant_functor,
    terminal_category,
    validate_transform,
)
from .presheaf import Presheaf, prop33_pullback_data
from .sieves import Sieve, Topology, elements_of_sieve, generate_sieve, sieve_lattice


@dataclass(frozen=True)
class SiteFunctor:
    """A functor decorated with topologies on its source and target."""

    functor: FinFunctor
    source_topology: Topology
    target_topology: Topology

    def __post_init__(self):
        if self.source_topology.base != self.functor.source:
            raise StructureError("source topology lives on the wrong category")
        if self.target_topology.base != self.functor.target:
            raise StructureError("target topology lives on the wrong category")


@dataclass(frozen=True)
class Verdict:
    ok: bool
    rule: str
    witness: tuple = ()
    trace: tuple = ()

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        head = "{}: {}".format(self.rule, "true" if self.ok else "false")
        if not self.ok:
            return head + "\n  witness: {}".format(self.witness)
        return head + "\n  trace entries: {}".format(len(self.trace))


def _image_sieve(functor: FinFunctor, apex: str, arrows) -> frozenset[str]:
    return generate_sieve(
        functor.target, functor.ob(apex), tuple(functor.ar(f) for f in sorted(arrows))
    ).arrows


def is_comorphism(sf: SiteFunctor) -> Verdict:
    """Target covers of image objects lift to source covers mapping inside them."""
    functor, j_src, j_tgt = sf.functor, sf.source_topology, sf.target_topology
    trace = []
    for c in functor.source.objects:
        for sieve in j_tgt.sieves(functor.ob(c)):
            lift = None
            for cand in j_src.sieves(c):
                if all(functor.ar(f) in sieve for f in cand):
                    lift = cand
                    break
            if lift is None:
                return Verdict(False, "comorphism", (c, tuple(sorted(sieve))))
            trace.append((c, tuple(sorted(sieve)), tuple(sorted(lift))))
    return Verdict(True, "comorphism", (), tuple(trace))


def is_cover_preserving(sf: SiteFunctor) -> Verdict:
    functor, j_src, j_tgt = sf.functor, sf.source_topology, sf.target_topology
    trace = []
    for c in functor.source.objects:
        for sieve in j_src.sieves(c):
            image = _image_sieve(functor, c, sieve)
            if not j_tgt.is_cover(functor.ob(c), image):
                return Verdict(False, "cover-preserving", (c, tuple(sorted(sieve)), tuple(sorted(image))))
            trace.append((c, tuple(sorted(sieve)), tuple(sorted(image))))
    return Verdict(True, "cover-preserving", (), tuple(trace))


def _comma_component_table(functor_to_d, d_i: str):
    """Map (right-leg object, arrow d_i -> image) to a connected-component id."""
    one = terminal_category()
    pick = constant_functor(one, functor_to_d.target, d_i)
    comma = comma_category(pick, functor_to_d)
    comps = connected_components(comma.category)
    comp_of = {}
    for idx, group in enumerate(comps):
        for name in group:
            comp_of[name] = idx
    table = {}
    for name, (_, e, w) in comma.obj_data.items():
        table[(e, w)] = comp_of[name]
    return table


def is_continuous(sf: SiteFunctor) -> Verdict:
    """Cover preservation plus the zig-zag cofinality condition: every square
    over a pair of cover members is locally connected in the comma category
    of the cover's elements."""
    cp = is_cover_preserving(sf)
    if not cp.ok:
        return Verdict(False, "continuous", ("not_cover_preserving",) + cp.witness, ())
    functor, j_src, k_tgt = sf.functor, sf.source_topology, sf.target_topology
    ccat, dcat = functor.source, functor.target
    trace = list(cp.trace)
    for c in ccat.objects:
        for sieve in j_src.sieves(c):
            elems = elements_of_sieve(Sieve(ccat, c, sieve))
            to_d = compose_functors(functor, elems.projection)
            obj_of = {arrow: name for name, arrow in elems.object_arrow.items()}
            tables: dict[str, dict] = {}
            members = sorted(sieve)
            for f in members:
                for g in members:
                    af, ag = functor.ar(f), functor.ar(g)
                    for d in dcat.objects:
                        for alpha in dcat.hom(d, functor.ob(ccat.src[f])):
                            lhs = dcat.compose(af, alpha)
                            for beta in dcat.hom(d, functor.ob(ccat.src[g])):
                                if lhs != dcat.compose(ag, beta):
                                    continue
                                qualifying = set()
                                for t in dcat.into(d):
                                    d_i = dcat.src[t]
                                    if d_i not in tables:
                                        tables[d_i] = _comma_component_table(to_d, d_i)
                                    tab = tables[d_i]
                                    c1 = tab.get((obj_of[f], dcat.compose(alpha, t)))
                                    c2 = tab.get((obj_of[g], dcat.compose(beta, t)))
                                    if c1 is not None and c1 == c2:
                                        qualifying.add(t)
                                if not k_tgt.is_cover(d, frozenset(qualifying)):
                                    return Verdict(
                                        False,
                                        "continuous",
                                        (
                                            "no_local_connection",
                                            (c, tuple(sorted(sieve)), f, g, d, alpha, beta, tuple(sorted(qualifying))),
                                        ),
                                    )
                                trace.append((c, f, g, d, alpha, beta, tuple(sorted(qualifying))))
    return Verdict(True, "continuous", (), tuple(trace))


def _flat_f1_sieve(sf: SiteFunctor, d: str) -> frozenset[str]:
    functor = sf.functor
    dcat = functor.target
    has_cone = {}
    for e in dcat.objects:
        has_cone[e] = any(dcat.hom(e, functor.ob(c)) for c in functor.source.objects)
    return frozenset(h for h in dcat.into(d) if has_cone[dcat.src[h]])


def _flat_f2_sieve(sf: SiteFunctor, d: str, c1: str, u1: str, c2: str, u2: str) -> frozenset[str]:
    functor = sf.functor
    ccat, dcat = functor.source, functor.target
    good = set()
    for h in dcat.into(d):
        e = dcat.src[h]
        found = False
        for c in ccat.objects:
            for s1 in ccat.hom(c, c1):
                a1 = functor.ar(s1)
                target1 = dcat.compose(u1, h)
                for gamma in dcat.hom(e, functor.ob(c)):
                    if dcat.compose(a1, gamma) != target1:
                        continue
                    for s2 in ccat.hom(c, c2):
                        if dcat.compose(functor.ar(s2), gamma) == dcat.compose(u2, h):
                            found = True
                            break
                    if found:
                        break
                if found:
                    break
            if found:
                break
        if found:
            good.add(h)
    return frozenset(good)


def _flat_f3_sieve(sf: SiteFunctor, d: str, s: str, t: str, u: str) -> frozenset[str]:
    functor = sf.functor
    ccat, dcat = functor.source, functor.target
    c1 = ccat.src[s]
    good = set()
    for h in dcat.into(d):
        e = dcat.src[h]
        target = dcat.compose(u, h)
        found = False
        for c in ccat.objects:
            for w in ccat.hom(c, c1):
                if ccat.compose(s, w) != ccat.compose(t, w):
                    continue
                aw = functor.ar(w)
                for gamma in dcat.hom(e, functor.ob(c)):
                    if dcat.compose(aw, gamma) == target:
                        found = True
                        break
                if found:
                    break
            if found:
                break
        if found:
            good.add(h)
    return frozenset(good)


def is_covering_flat(sf: SiteFunctor) -> Verdict:
    """Localised filtering: cones into images exist locally, pairs of
    generalized elements admit local spans through one image, and parallel
    pairs are locally equalized."""
    functor, k_tgt = sf.functor, sf.target_topology
    ccat, dcat = functor.source, functor.target
    trace = []
    for d in dcat.objects:
        w = _flat_f1_sieve(sf, d)
        if not k_tgt.is_cover(d, w):
            return Verdict(False, "covering-flat", ("no_local_cone", d, tuple(sorted(w))))
        trace.append(("f1", d, tuple(sorted(w))))
    for d in dcat.objects:
        for c1 in ccat.objects:
            for u1 in dcat.hom(d, functor.ob(c1)):
                for c2 in ccat.objects:
                    for u2 in dcat.hom(d, functor.ob(c2)):
                        w = _flat_f2_sieve(sf, d, c1, u1, c2, u2)
                        if not k_tgt.is_cover(d, w):
                            return Verdict(
                                False,
                                "covering-flat",
                                ("no_local_span", (d, c1, u1, c2, u2), tuple(sorted(w))),
                            )
                        trace.append(("f2", d, u1, u2))
    for s in ccat.arrows:
        for t in ccat.arrows:
            if ccat.src[s] != ccat.src[t] or ccat.tgt[s] != ccat.tgt[t]:
                continue
            for d in dcat.objects:
                for u in dcat.hom(d, functor.ob(ccat.src[s])):
                    if dcat.compose(functor.ar(s), u) != dcat.compose(functor.ar(t), u):
                        continue
                    w = _flat_f3_sieve(sf, d, s, t, u)
                    if not k_tgt.is_cover(d, w):
                        return Verdict(
                            False,
                            "covering-flat",
                            ("no_local_equalization", (d, s, t, u), tuple(sorted(w))),
                        )
                    trace.append(("f3", d, s, t, u))
    return Verdict(True, "covering-flat", (), tuple(trace))


def is_morphism_of_sites(sf: SiteFunctor) -> Verdict:
    cp = is_cover_preserving(sf)
    if not cp.ok:
        return Verdict(False, "morphism-of-sites", ("not_cover_preserving",) + cp.witness)
    fl = is_covering_flat(sf)
    if not fl.ok:
        return Verdict(False, "morphism-of-sites", ("not_covering_flat",) + fl.witness)
    return Verdict(True, "morphism-of-sites", (), cp.trace + fl.trace)


def is_dense_morphism(sf: SiteFunctor) -> Verdict:
    """Morphism of sites + cover reflection, local covering by images, local
    fullness and local faithfulness, each with a replayable witness."""
    ms = is_morphism_of_sites(sf)
    if not ms.ok:
        return Verdict(False, "dense-morphism", ("not_morphism_of_sites",) + ms.witness)
    functor, j_src, j_tgt = sf.functor, sf.source_topology, sf.target_topology
    ccat_src, ccat_tgt = functor.source, functor.target
    trace = list(ms.trace)
    for c in ccat_src.objects:
        for sieve in sieve_lattice(ccat_src, c):
            image = _image_sieve(functor, c, sieve)
            if j_tgt.is_cover(functor.ob(c), image) and not j_src.is_cover(c, sieve):
                return Verdict(False, "dense-morphism", ("cover_not_reflected", c, tuple(sorted(sieve))))
    images = {functor.ob(c) for c in ccat_src.objects}
    for d in ccat_tgt.objects:
        family = [m for m in ccat_tgt.into(d) if ccat_tgt.src[m] in images]
        w = generate_sieve(ccat_tgt, d, family).arrows
        if not j_tgt.is_cover(d, w):
            return Verdict(False, "dense-morphism", ("not_locally_covered_by_images", d, tuple(sorted(w))))
        trace.append(("images-cover", d, tuple(sorted(w))))
    for c1 in ccat_src.objects:
        for c2 in ccat_src.objects:
            for g in ccat_tgt.hom(functor.ob(c1), functor.ob(c2)):
                good = set()
                for v in ccat_src.into(c1):
                    if any(
                        ccat_tgt.compose(g, functor.ar(v)) == functor.ar(g2)
                        for g2 in ccat_src.hom(ccat_src.src[v], c2)
                    ):
                        good.add(v)
                if not j_src.is_cover(c1, frozenset(good)):
                    return Verdict(False, "dense-morphism", ("not_locally_full", (c1, c2, g), tuple(sorted(good))))
                trace.append(("local-fullness", c1, c2, g))
    for g1 in ccat_src.arrows:
        for g2 in ccat_src.arrows:
            if g1 >= g2 or ccat_src.src[g1] != ccat_src.src[g2] or ccat_src.tgt[g1] != ccat_src.tgt[g2]:
                continue
            if functor.ar(g1) != functor.ar(g2):
                continue
            c1 = ccat_src.src[g1]
            good = frozenset(
                v for v in ccat_src.into(c1) if ccat_src.compose(g1, v) == ccat_src.compose(g2, v)
            )
            if not j_src.is_cover(c1, good):
                return Verdict(False, "dense-morphism", ("not_locally_faithful", (g1, g2), tuple(sorted(good))))
            trace.append(("local-faithfulness", g1, g2))
    return Verdict(True, "dense-morphism", (), tuple(trace))


@dataclass(frozen=True)
class Prop33Square:
    """The square of a comparison condition check: a continuous functor over a
    base-change morphism, with the connecting transformation and the topology
    on the top-right site."""

    a_top: FinFunctor
    b_base: FinFunctor
    phi: NatTransform
    p: FinFunctor
    p_prime: FinFunctor
    k_top: Topology

    def __post_init__(self):
        want_src = compose_functors(self.p, self.a_top)
        want_tgt = compose_functors(self.b_base, self.p_prime)
        validate_transform(self.phi.component, want_src, want_tgt)
        if self.k_top.base != self.p.source:
            raise StructureError("top topology must live on the target total category")


def check_prop33_conditions(square: Prop33Square) -> Verdict:
    """Both site-level conditions: local existence of compatible triplets, and
    local connectedness of triplet pairs in the comma category over the
    pullback presheaf's elements."""
    a_fun, b_fun, phi = square.a_top, square.b_base, square.phi.component
    p, p2, k_top = square.p, square.p_prime, square.k_top
    dcat, d2cat = p.source, p2.source
    ccat, c2cat = p.target, p2.target
    trace = []
    for f_prime in c2cat.arrows:
        c2_obj, c1_obj = c2cat.src[f_prime], c2cat.tgt[f_prime]
        for d_prime in d2cat.objects:
            for u_prime in c2cat.hom(p2.ob(d_prime), c1_obj):
                triplets_by_src: dict[str, list] = {}
                for dbar in d2cat.objects:
                    for gbar in d2cat.hom(dbar, d_prime):
                        for ubar in c2cat.hom(p2.ob(dbar), c2_obj):
                            if c2cat.compose(u_prime, p2.ar(gbar)) != c2cat.compose(f_prime, ubar):
                                continue
                            triplets_by_src.setdefault(dbar, []).append((gbar, ubar))
                for d in dcat.objects:
                    for g in dcat.hom(d, a_fun.ob(d_prime)):
                        rhs_fixed = ccat.compose(
                            ccat.compose(b_fun.ar(u_prime), phi[d_prime]), p.ar(g)
                        )
                        for u2 in ccat.hom(p.ob(d), b_fun.ob(c2_obj)):
                            if ccat.compose(b_fun.ar(f_prime), u2) != rhs_fixed:
                                continue
                            qualifying = set()
                            for t in dcat.into(d):
                                e = dcat.src[t]
                                hit = False
                                for dbar, pairs in triplets_by_src.items():
                                    for x in dcat.hom(e, a_fun.ob(dbar)):
                                        for (gbar, ubar) in pairs:
                                            eq1 = ccat.compose(u2, p.ar(t)) == ccat.compose(
                                                ccat.compose(b_fun.ar(ubar), phi[dbar]), p.ar(x)
                                            )
                                            eq2 = dcat.compose(g, t) == dcat.compose(a_fun.ar(gbar), x)
                                            if eq1 and eq2:
                                                hit = True
                                                break
                                        if hit:
                                            break
                                    if hit:
                                        break
                                if hit:
                                    qualifying.add(t)
                            if not k_top.is_cover(d, frozenset(qualifying)):
                                return Verdict(
                                    False,
                                    "prop33",
                                    ("no_local_triplets", (f_prime, d_prime, u_prime, d, g, u2), tuple(sorted(qualifying))),
                                )
                            trace.append(("b1", f_prime, d_prime, u_prime, d, g, u2))
                presheaf, elem_data = prop33_pullback_data(p2, d_prime, u_prime, f_prime)
                obj_name = {}
                for name, (e2, elem) in _presheaf_element_objects(presheaf).items():
                    obj_name[(e2, elem)] = name
                from .presheaf import elements_of_presheaf

                elems = elements_of_presheaf(presheaf)
                to_d = compose_functors(a_fun, elems.projection)
                tables: dict[str, dict] = {}
                for d in dcat.objects:
                    trips = []
                    for dbar in d2cat.objects:
                        for elem in presheaf.values[dbar]:
                            for x in dcat.hom(d, a_fun.ob(dbar)):
                                trips.append((dbar, elem, x))
                    for i, (d1, e1, x1) in enumerate(trips):
                        g1, u1 = elem_data[d1][e1]
                        left1 = ccat.compose(ccat.compose(b_fun.ar(u1), phi[d1]), p.ar(x1))
                        top1 = dcat.compose(a_fun.ar(g1), x1)
                        for (d2_, e2_, x2) in trips[i:]:
                            g2, u2_ = elem_data[d2_][e2_]
                            if left1 != ccat.compose(
                                ccat.compose(b_fun.ar(u2_), phi[d2_]), p.ar(x2)
                            ):
                                continue
                            if top1 != dcat.compose(a_fun.ar(g2), x2):
                                continue
                            qualifying = set()
                            for t in dcat.into(d):
                                e = dcat.src[t]
                                if e not in tables:
                                    tables[e] = _comma_component_table(to_d, e)
                                tab = tables[e]
                                k1 = tab.get((obj_name[(d1, e1)], dcat.compose(x1, t)))
                                k2 = tab.get((obj_name[(d2_, e2_)], dcat.compose(x2, t)))
                                if k1 is not None and k1 == k2:
                                    qualifying.add(t)
                            if not k_top.is_cover(d, frozenset(qualifying)):
                                return Verdict(
                                    False,
                                    "prop33",
                                    (
                                        "triplets_not_locally_connected",
                                        (f_prime, d_prime, u_prime, d, (e1, x1), (e2_, x2)),
                                        tuple(sorted(qualifying)),
                                    ),
                                )
                            trace.append(("b2", f_prime, d_prime, u_prime, d, e1, e2_))
    return Verdict(True, "prop33", (), tuple(trace))


def _presheaf_element_objects(p: Presheaf) -> dict[str, tuple[str, str]]:
    out = {}
    for c in p.base.objects:
        for a in p.values[c]:
            out["<{}|{}>".format(c, a)] = (c, a)
    return out


# ---------------------------------------------------------------------------
# Witness replay


def replay(verdict: Verdict, subject) -> bool:
    """Re-evaluate the decided condition at the verdict's witness or trace.

    Negative verdicts must re-fail; positive verdicts must re-verify.
    Returns True when the replay is consistent with the verdict.
    """
    if verdict.rule == "comorphism":
        sf = subject
        if verdict.ok:
            for c, sieve, lift in verdict.trace:
                if not sf.source_topology.is_cover(c, frozenset(lift)):
                    return False
                if not all(sf.functor.ar(f) in set(sieve) for f in lift):
                    return False
            return True
        c, sieve = verdict.witness
        for cand in sf.source_topology.sieves(c):
            if all(sf.functor.ar(f) in set(sieve) for f in cand):
                return False
        return True
    if verdict.rule == "cover-preserving":
        sf = subject
        if verdict.ok:
            for c, sieve, image in verdict.trace:
                if not sf.target_topology.is_cover(sf.functor.ob(c), frozenset(image)):
                    return False
            return True
        c, sieve, image = verdict.witness
        return not sf.target_topology.is_cover(sf.functor.ob(c), frozenset(image))
    if verdict.rule in ("continuous", "covering-flat", "morphism-of-sites", "dense-morphism", "prop33"):
        fresh = {
            "continuous": is_continuous,
            "covering-flat": is_covering_flat,
            "morphism-of-sites": is_morphism_of_sites,
            "dense-morphism": is_dense_morphism,
            "prop33": check_prop33_conditions,
        }[verdict.rule](subject)
        return fresh.ok == verdict.ok and (verdict.ok or fresh.witness == verdict.witness)
    raise StructureError("unknown verdict rule {}".format(verdict.rule))
