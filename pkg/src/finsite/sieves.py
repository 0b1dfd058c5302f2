"""Sieves, coverages and Grothendieck topologies on finite categories.

Sieves are frozensets of arrow names sharing a target; a topology stores,
per object, the full (saturated) set of covering sieves.  Saturation is a
worklist fixed point over the finite sieve lattice, which keeps every
"exists a covering family such that ..." question a single membership test:
covers are upward closed, and the qualifying arrows of such a question
always form a sieve.
"""
from __future__ import annotations

from dataclasses import dataclass

from .fincat import FinCategory, FinFunctor, StructureError, validate_functor


class CapExceeded(RuntimeError):
    """An enumeration was asked to continue past its cap."""


@dataclass(frozen=True)
class Sieve:
    base: FinCategory
    apex: str
    arrows: frozenset[str]

    def sorted_arrows(self) -> tuple[str, ...]:
        return tuple(sorted(self.arrows))

    def __le__(self, other: "Sieve") -> bool:
        return self.arrows <= other.arrows


def validate_sieve(base: FinCategory, apex: str, arrows) -> Sieve:
    arrows = frozenset(arrows)
    for f in sorted(arrows):
        if base.tgt[f] != apex:
            raise StructureError("arrow {} does not target the apex {}".format(f, apex), witness=f)
        for g in base.into(base.src[f]):
            if base.compose(f, g) not in arrows:
                raise StructureError(
                    "not precomposition-closed: {} o {} escapes".format(f, g), witness=(f, g)
                )
    return Sieve(base, apex, arrows)


def generate_sieve(base: FinCategory, apex: str, family) -> Sieve:
    """Smallest sieve on ``apex`` containing the family (empty family allowed)."""
    family = tuple(family)
    for f in family:
        if base.tgt[f] != apex:
            raise StructureError("mixed targets in generating family", witness=f)
    out = set()
    for f in family:
        out.add(f)
        for g in base.into(base.src[f]):
            out.add(base.compose(f, g))
    return Sieve(base, apex, frozenset(out))


def maximal_sieve(base: FinCategory, apex: str) -> Sieve:
    return Sieve(base, apex, frozenset(base.into(apex)))


def empty_sieve(base: FinCategory, apex: str) -> Sieve:
    return Sieve(base, apex, frozenset())


def pullback_arrows(base: FinCategory, f: str, arrows: frozenset[str]) -> frozenset[str]:
    return frozenset(g for g in base.into(base.src[f]) if base.compose(f, g) in arrows)


def pullback_sieve(f: str, sieve: Sieve) -> Sieve:
    base = sieve.base
    if base.tgt[f] != sieve.apex:
        raise StructureError("pullback arrow must target the sieve apex", witness=f)
    return Sieve(base, base.src[f], pullback_arrows(base, f, sieve.arrows))


def sieve_lattice(base: FinCategory, apex: str) -> tuple[frozenset[str], ...]:
    """All sieves on ``apex``: the union closure of the principal sieves. Memoised."""
    cache = base._scratch.setdefault("sieve_lattice", {})
    if apex not in cache:
        principals = {generate_sieve(base, apex, (f,)).arrows for f in base.into(apex)}
        lattice = {frozenset()} | principals
        frontier = set(lattice)
        while frontier:
            fresh = set()
            for s in frontier:
                for p in principals:
                    u = s | p
                    if u not in lattice:
                        lattice.add(u)
                        fresh.add(u)
            frontier = fresh
        cache[apex] = tuple(sorted(lattice, key=lambda s: (len(s), tuple(sorted(s)))))
    return cache[apex]


@dataclass(frozen=True)
class Coverage:
    """Generating families per object; saturation turns it into a topology."""

    base: FinCategory
    generators: dict[str, frozenset[frozenset[str]]]


def make_coverage(base: FinCategory, generators) -> Coverage:
    gens: dict[str, frozenset[frozenset[str]]] = {}
    for c, fams in generators.items():
        if c not in set(base.objects):
            raise StructureError("coverage indexes unknown object {}".format(c), witness=c)
        fams = frozenset(frozenset(fam) for fam in fams)
        for fam in fams:
            for f in fam:
                if base.tgt[f] != c:
                    raise StructureError("family member {} does not target {}".format(f, c), witness=f)
        gens[c] = fams
    return Coverage(base, gens)


@dataclass(frozen=True)
class Topology:
    base: FinCategory
    covers: dict[str, frozenset[frozenset[str]]]

    def is_cover(self, obj: str, arrows: frozenset[str]) -> bool:
        return arrows in self.covers[obj]

    def sieves(self, obj: str) -> tuple[frozenset[str], ...]:
        return tuple(sorted(self.covers[obj], key=lambda s: (len(s), tuple(sorted(s)))))

    def __eq__(self, other):
        return (
            isinstance(other, Topology)
            and self.base == other.base
            and self.covers == other.covers
        )

    def __hash__(self):
        return hash((self.base, tuple(sorted((c, tuple(sorted(map(tuple, map(sorted, s))))) for c, s in self.covers.items()))))


def trivial_topology(base: FinCategory) -> Topology:
    return Topology(base, {c: frozenset({maximal_sieve(base, c).arrows}) for c in base.objects})


def saturate(coverage: Coverage) -> Topology:
    """Least topology whose covers include every sieve containing a generator family.

    Worklist fixed point: seed with maximal sieves and generated sieves, then
    close under upward containment, pullback stability and transitivity until
    stable.  Terminates because each object's sieve lattice is finite.
    """
    base = coverage.base
    lattice = {c: sieve_lattice(base, c) for c in base.objects}
    covering: dict[str, set[frozenset[str]]] = {c: set() for c in base.objects}
    for c in base.objects:
        covering[c].add(maximal_sieve(base, c).arrows)
    for c, fams in coverage.generators.items():
        for fam in fams:
            covering[c].add(generate_sieve(base, c, fam).arrows)
    changed = True
    while changed:
        changed = False
        for c in base.objects:
            cov = covering[c]
            for s in list(cov):
                for t in lattice[c]:
                    if s <= t and t not in cov:
                        cov.add(t)
                        changed = True
            for s in list(cov):
                for f in base.into(c):
                    pb = pullback_arrows(base, f, s)
                    if pb not in covering[base.src[f]]:
                        covering[base.src[f]].add(pb)
                        changed = True
            for r in lattice[c]:
                if r in cov:
                    continue
                for t in cov:
                    if all(pullback_arrows(base, f, r) in covering[base.src[f]] for f in t):
                        cov.add(r)
                        changed = True
                        break
    return Topology(base, {c: frozenset(v) for c, v in covering.items()})


def coverage_of(topology: Topology) -> Coverage:
    return Coverage(topology.base, {c: topology.covers[c] for c in topology.base.objects})


def is_topology(base: FinCategory, covers) -> tuple[bool, tuple]:
    """Exhaustively check maximality, stability and transitivity.

    Returns (ok, witness); the witness names the failing axiom and datum.
    """
    covers = {c: frozenset(map(frozenset, s)) for c, s in covers.items()}
    for c in base.objects:
        if c not in covers:
            return False, ("missing_object", c)
        for s in covers[c]:
            for f in sorted(s):
                if base.tgt[f] != c:
                    return False, ("not_a_sieve", (c, tuple(sorted(s))))
                for g in base.into(base.src[f]):
                    if base.compose(f, g) not in s:
                        return False, ("not_a_sieve", (c, tuple(sorted(s))))
    for c in base.objects:
        if maximal_sieve(base, c).arrows not in covers[c]:
            return False, ("maximality", c)
    for c in base.objects:
        for s in covers[c]:
            for f in base.into(c):
                if pullback_arrows(base, f, s) not in covers[base.src[f]]:
                    return False, ("stability", (c, tuple(sorted(s)), f))
    for c in base.objects:
        for r in sieve_lattice(base, c):
            if r in covers[c]:
                continue
            for t in covers[c]:
                if all(pullback_arrows(base, f, r) in covers[base.src[f]] for f in t):
                    return False, ("transitivity", (c, tuple(sorted(r)), tuple(sorted(t))))
    return True, ()


def topology_leq(j1: Topology, j2: Topology) -> bool:
    if j1.base != j2.base:
        raise StructureError("topologies live on different bases")
    return all(j1.covers[c] <= j2.covers[c] for c in j1.base.objects)


class InducedTopologyError(StructureError):
    """The induced-covers candidate fails a topology axiom."""


def induced_image_topology(functor: FinFunctor, target_topology: Topology) -> Topology:
    """Covers upstairs are the sieves whose generated image covers downstairs.

    Verifies the three axioms a posteriori and raises with the failing axiom
    when the candidate is not a topology.
    """
    if functor.target != target_topology.base:
        raise StructureError("topology must live on the functor's target")
    src = functor.source
    tgt = functor.target
    covers = {}
    for c in src.objects:
        good = set()
        for s in sieve_lattice(src, c):
            image = generate_sieve(tgt, functor.ob(c), tuple(functor.ar(f) for f in sorted(s)))
            if target_topology.is_cover(functor.ob(c), image.arrows):
                good.add(s)
        covers[c] = frozenset(good)
    ok, witness = is_topology(src, covers)
    if not ok:
        raise InducedTopologyError("candidate not a topology: {}".format(witness), witness=witness)
    return Topology(src, covers)


def _upsets(lattice, top) -> list[frozenset[frozenset[str]]]:
    """All upward-closed sieve families containing the maximal sieve."""
    out = []
    n = len(lattice)
    others = [s for s in lattice if s != top]
    for bits in range(1 << len(others)):
        fam = {top}
        for i, s in enumerate(others):
            if bits >> i & 1:
                fam.add(s)
        closed = True
        for s in fam:
            for t in lattice:
                if s <= t and t not in fam:
                    closed = False
                    break
            if not closed:
                break
        if closed:
            out.append(frozenset(fam))
    out.sort(key=lambda fam: (len(fam), tuple(sorted(tuple(sorted(s)) for s in fam))))
    return out


def topology_candidate_count(base: FinCategory) -> int:
    """Upper bound on the covers-maps enumerate_topologies must sift through."""
    total = 1
    for c in base.objects:
        total *= len(_upsets(sieve_lattice(base, c), maximal_sieve(base, c).arrows))
        if total > 10**9:
            return total
    return total


def enumerate_topologies(base: FinCategory, cap: int | None = None):
    """Yield every topology on ``base`` in a deterministic order.

    Enumerates only upward-closed candidate families per object (upward
    closure is forced by the axioms) and filters with is_topology.  Raises
    CapExceeded when asked to continue past ``cap``.
    """
    per_object = []
    for c in base.objects:
        lat = sieve_lattice(base, c)
        if len(lat) > 14:
            raise CapExceeded("sieve lattice too large on {}".format(c))
        per_object.append(_upsets(lat, maximal_sieve(base, c).arrows))

    emitted = 0

    def product(i, acc):
        nonlocal emitted
        if i == len(base.objects):
            covers = dict(zip(base.objects, acc))
            ok, _ = is_topology(base, covers)
            if ok:
                if cap is not None and emitted >= cap:
                    raise CapExceeded("topology enumeration cap {} exceeded".format(cap))
                emitted += 1
                yield Topology(base, covers)
            return
        for fam in per_object[i]:
            yield from product(i + 1, acc + [fam])

    yield from product(0, [])


def map_topology(iso: FinFunctor, topology: Topology) -> Topology:
    """Transport a topology along an isomorphism of categories (for oracles)."""
    src, tgt = iso.source, iso.target
    covers = {}
    for c in src.objects:
        covers[iso.ob(c)] = frozenset(frozenset(iso.ar(f) for f in s) for s in topology.covers[c])
    ok, witness = is_topology(tgt, covers)
    if not ok:
        raise StructureError("transport failed (functor not an iso?): {}".format(witness))
    return Topology(tgt, covers)


@dataclass(frozen=True)
class ElementsCategory:
    """The category of elements of a sieve, with its projection to the base."""

    category: FinCategory
    projection: FinFunctor
    object_arrow: dict[str, str]


def elements_of_sieve(sieve: Sieve) -> ElementsCategory:
    """Objects are the arrows of the sieve; morphisms are factorisations."""
    base = sieve.base
    members = sieve.sorted_arrows()
    obj_of = {f: "<{}>".format(f) for f in members}
    names = tuple(obj_of[f] for f in members)
    arrows = {}
    data = {}
    for f in members:
        for g in members:
            for w in base.hom(base.src[f], base.src[g]):
                if base.compose(g, w) == f:
                    name = "{}@{}->{}".format(w, obj_of[f], obj_of[g])
                    arrows[name] = (obj_of[f], obj_of[g])
                    data[name] = w
    identity = {}
    for f in members:
        o = obj_of[f]
        identity[o] = "{}@{}->{}".format(base.identity[base.src[f]], o, o)
    table = {}
    for b, (bs, bt) in arrows.items():
        for a, (asrc, at) in arrows.items():
            if at == bs:
                w = base.compose(data[b], data[a])
                table[(b, a)] = "{}@{}->{}".format(w, asrc, bt)
    from .fincat import validate_category

    cat = validate_category(names, arrows, identity, table)
    proj = validate_functor(
        {obj_of[f]: base.src[f] for f in members},
        {a: data[a] for a in arrows},
        cat,
        base,
    )
    return ElementsCategory(cat, proj, {obj_of[f]: f for f in members})
