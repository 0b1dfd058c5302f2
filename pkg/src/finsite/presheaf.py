"""Finite-set-valued presheaves, the sheaf condition and the plus construction.

The plus construction materialises equivalence classes of (cover, matching
family) pairs under common-refinement agreement; applying it twice is the
sheafification.  Class representatives are canonical (largest cover, then
lexicographic), so all tables are deterministic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .fincat import FinCategory, FinFunctor, StructureError, validate_category, validate_functor
from .sieves import CapExceeded, Topology, maximal_sieve, pullback_arrows


@dataclass(frozen=True)
class Presheaf:
    base: FinCategory
    values: dict[str, tuple[str, ...]]
    action: dict[str, dict[str, str]]

    def act(self, f: str, a: str) -> str:
        return self.action[f][a]


def validate_presheaf(base: FinCategory, values, action) -> Presheaf:
    values = {c: tuple(v) for c, v in values.items()}
    action = {f: dict(m) for f, m in action.items()}
    for c in base.objects:
        if c not in values:
            raise StructureError("missing value set at {}".format(c), witness=c)
        if len(set(values[c])) != len(values[c]):
            raise StructureError("duplicate elements at {}".format(c), witness=c)
    for f in base.arrows:
        if base.is_identity(f):
            action.setdefault(f, {a: a for a in values[base.src[f]]})
    for f in base.arrows:
        m = action.get(f)
        if m is None:
            raise StructureError("missing action along {}".format(f), witness=f)
        s, t = base.src[f], base.tgt[f]
        if set(m) != set(values[t]) or not set(m.values()) <= set(values[s]):
            raise StructureError("action along {} is not a map values({}) -> values({})".format(f, t, s), witness=f)
    for c in base.objects:
        i = base.identity[c]
        if action[i] != {a: a for a in values[c]}:
            raise StructureError("identity action at {} is not the identity".format(c), witness=c)
    for (g, f), h in base.table.items():
        fa, ga, ha = action[f], action[g], action[h]
        for a in values[base.tgt[g]]:
            if fa[ga[a]] != ha[a]:
                raise StructureError("actions not functorial on ({}, {})".format(g, f), witness=(g, f))
    return Presheaf(base, values, action)


def matching_families(p: Presheaf, apex: str, sieve: frozenset[str]) -> list[dict[str, str]]:
    """All compatible assignments on the sieve, by backtracking in sorted order."""
    base = p.base
    members = sorted(sieve)
    pairs = []
    member_set = set(members)
    for f in members:
        for g in base.into(base.src[f]):
            fg = base.compose(f, g)
            if fg in member_set:
                pairs.append((f, g, fg))
    out: list[dict[str, str]] = []
    assign: dict[str, str] = {}

    def ok(f):
        for (a, g, ag) in pairs:
            if a in assign and ag in assign and (a == f or ag == f):
                if p.act(g, assign[a]) != assign[ag]:
                    return False
        return True

    def go(i):
        if i == len(members):
            out.append(dict(assign))
            return
        f = members[i]
        for v in p.values[base.src[f]]:
            assign[f] = v
            if ok(f):
                go(i + 1)
            del assign[f]

    go(0)
    return out


def amalgamations(p: Presheaf, apex: str, sieve: frozenset[str], family: dict[str, str]) -> list[str]:
    return [a for a in p.values[apex] if all(p.act(f, a) == family[f] for f in sorted(sieve))]


def is_sheaf(p: Presheaf, topology: Topology) -> tuple[bool, tuple]:
    """Unique amalgamation for every matching family on every cover."""
    if p.base != topology.base:
        raise StructureError("presheaf and topology live on different bases")
    for c in p.base.objects:
        for sieve in topology.sieves(c):
            for fam in matching_families(p, c, sieve):
                glue = amalgamations(p, c, sieve, fam)
                if len(glue) != 1:
                    kind = "no_amalgamation" if not glue else "ambiguous_amalgamation"
                    return False, (kind, (c, tuple(sorted(sieve)), tuple(sorted(fam.items())), tuple(glue)))
    return True, ()


def _fam_key(fam: dict[str, str]) -> tuple:
    return tuple(sorted(fam.items()))


@dataclass(frozen=True)
class PlusResult:
    presheaf: Presheaf
    unit: dict[str, dict[str, str]]
    class_of: dict[str, dict[tuple, str]]


def plus(p: Presheaf, topology: Topology) -> PlusResult:
    """One application of the plus construction.

    Elements at c are classes of (cover, matching family); two pairs agree
    when the families coincide on some common covering refinement.
    """
    base = p.base
    pairs_at: dict[str, list[tuple[frozenset, dict[str, str]]]] = {}
    for c in base.objects:
        pairs = []
        for sieve in topology.sieves(c):
            for fam in matching_families(p, c, sieve):
                pairs.append((sieve, fam))
        pairs_at[c] = pairs
    parent: dict[tuple, tuple] = {}

    def key(c, sieve, fam):
        return (c, tuple(sorted(sieve)), _fam_key(fam))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for c in base.objects:
        for sieve, fam in pairs_at[c]:
            parent.setdefault(key(c, sieve, fam), key(c, sieve, fam))
        pairs = pairs_at[c]
        for i, (s1, f1) in enumerate(pairs):
            for (s2, f2) in pairs[i + 1 :]:
                meet = s1 & s2
                agree = False
                for s3 in topology.covers[c]:
                    if s3 <= meet and all(f1[a] == f2[a] for a in s3):
                        agree = True
                        break
                if agree:
                    union(key(c, s1, f1), key(c, s2, f2))
    classes: dict[str, dict[tuple, list[tuple]]] = {c: {} for c in base.objects}
    for c in base.objects:
        for sieve, fam in pairs_at[c]:
            k = key(c, sieve, fam)
            classes[c].setdefault(find(k), []).append((sieve, fam))

    def canonical(members):
        best = None
        for sieve, fam in members:
            cand = (-len(sieve), tuple(sorted(sieve)), _fam_key(fam))
            if best is None or cand < best:
                best = cand
        return (tuple(best[1]), best[2])

    values: dict[str, tuple[str, ...]] = {}
    class_of: dict[str, dict[tuple, str]] = {c: {} for c in base.objects}
    for c in base.objects:
        reps = sorted(canonical(m) for m in classes[c].values())
        names = {rep: "s{}".format(i) for i, rep in enumerate(reps)}
        values[c] = tuple(names[rep] for rep in reps)
        for root, members in classes[c].items():
            nm = names[canonical(members)]
            for sieve, fam in members:
                class_of[c][(tuple(sorted(sieve)), _fam_key(fam))] = nm
    action: dict[str, dict[str, str]] = {}
    rep_pair: dict[str, dict[str, tuple]] = {c: {} for c in base.objects}
    for c in base.objects:
        for (skey, fkey), nm in class_of[c].items():
            rep_pair[c].setdefault(nm, (skey, fkey))
    for f in base.arrows:
        s, t = base.src[f], base.tgt[f]
        m = {}
        for nm in values[t]:
            skey, fkey = rep_pair[t][nm]
            sieve = frozenset(skey)
            fam = dict(fkey)
            pb = pullback_arrows(base, f, sieve)
            pulled = {g: fam[base.compose(f, g)] for g in pb}
            m[nm] = class_of[s][(tuple(sorted(pb)), _fam_key(pulled))]
        action[f] = m
    out = validate_presheaf(base, values, action)
    unit: dict[str, dict[str, str]] = {}
    for c in base.objects:
        top = maximal_sieve(base, c).arrows
        unit[c] = {}
        for a in p.values[c]:
            fam = {f: p.act(f, a) for f in top}
            unit[c][a] = class_of[c][(tuple(sorted(top)), _fam_key(fam))]
    return PlusResult(out, unit, class_of)


@dataclass(frozen=True)
class Sheafification:
    sheaf: Presheaf
    unit: dict[str, dict[str, str]]


def sheafify(p: Presheaf, topology: Topology) -> Sheafification:
    """Plus applied twice (always twice, for auditability), with the composite unit."""
    first = plus(p, topology)
    second = plus(first.presheaf, topology)
    unit = {
        c: {a: second.unit[c][first.unit[c][a]] for a in p.values[c]}
        for c in p.base.objects
    }
    ok, witness = is_sheaf(second.presheaf, topology)
    if not ok:
        raise StructureError("double plus failed to produce a sheaf: {}".format(witness))
    return Sheafification(second.presheaf, unit)


def precompose(p: Presheaf, functor: FinFunctor) -> Presheaf:
    """values(c) = values(F(c)), actions via the arrow map."""
    if functor.target != p.base:
        raise StructureError("functor must land in the presheaf's base")
    values = {c: p.values[functor.ob(c)] for c in functor.source.objects}
    action = {f: dict(p.action[functor.ar(f)]) for f in functor.source.arrows}
    return validate_presheaf(functor.source, values, action)


def representable(base: FinCategory, obj: str) -> Presheaf:
    values = {c: base.hom(c, obj) for c in base.objects}
    action = {}
    for f in base.arrows:
        action[f] = {u: base.compose(u, f) for u in values[base.tgt[f]]}
    return validate_presheaf(base, values, action)


def presheaf_morphisms(p: Presheaf, q: Presheaf):
    """All natural maps p -> q, by per-object backtracking with naturality pruning."""
    base = p.base
    objs = list(base.objects)
    assign: dict[str, dict[str, str]] = {}

    def consistent():
        for f in base.arrows:
            s, t = base.src[f], base.tgt[f]
            if s in assign and t in assign:
                for a in p.values[t]:
                    if assign[s][p.act(f, a)] != q.act(f, assign[t][a]):
                        return False
        return True

    def go(i):
        if i == len(objs):
            yield {c: dict(m) for c, m in assign.items()}
            return
        c = objs[i]
        dom, cod = p.values[c], q.values[c]
        for image in itertools.product(cod, repeat=len(dom)):
            assign[c] = dict(zip(dom, image))
            if consistent():
                yield from go(i + 1)
            del assign[c]

    yield from go(0)


def morphism_count_budget(p: Presheaf, q: Presheaf) -> int:
    total = 1
    for c in p.base.objects:
        total *= max(1, len(q.values[c])) ** len(p.values[c])
        if total > 10**9:
            return total
    return total


def compose_morphisms(p: Presheaf, outer: dict, inner: dict) -> dict:
    return {c: {a: outer[c][inner[c][a]] for a in inner[c]} for c in inner}


def enumerate_presheaves(base: FinCategory, max_size: int = 3, budget: int = 200_000):
    """All presheaves with value sets {0..k-1}, k <= max_size, deterministic order.

    Raises CapExceeded when the assignment space exceeds the budget.
    """
    non_id = [f for f in base.arrows if not base.is_identity(f)]
    sizes = list(itertools.product(range(max_size + 1), repeat=len(base.objects)))
    space = 0
    for combo in sizes:
        per = 1
        sz = dict(zip(base.objects, combo))
        for f in non_id:
            per *= max(1, sz[base.src[f]]) ** sz[base.tgt[f]]
            if per > budget:
                break
        space += per
        if space > budget:
            raise CapExceeded("presheaf enumeration space exceeds budget")
    for combo in sizes:
        sz = dict(zip(base.objects, combo))
        values = {c: tuple(str(i) for i in range(sz[c])) for c in base.objects}
        assign: dict[str, dict[str, str]] = {}

        def consistent():
            for (g, f), h in base.table.items():
                acts = []
                for a in (f, g, h):
                    if base.is_identity(a):
                        acts.append({v: v for v in values[base.src[a]]})
                    elif a in assign:
                        acts.append(assign[a])
                    else:
                        acts.append(None)
                fa, ga, ha = acts
                if fa is None or ga is None or ha is None:
                    continue
                for a in values[base.tgt[g]]:
                    if fa[ga[a]] != ha[a]:
                        return False
            return True

        def go(i):
            if i == len(non_id):
                action = {f: dict(m) for f, m in assign.items()}
                yield validate_presheaf(base, values, action)
                return
            f = non_id[i]
            dom = values[base.tgt[f]]
            cod = values[base.src[f]]
            if len(dom) > 0 and len(cod) == 0:
                return
            for image in itertools.product(cod, repeat=len(dom)):
                assign[f] = dict(zip(dom, image))
                if consistent():
                    yield from go(i + 1)
                del assign[f]

        yield from go(0)


def sheaf_targets(base: FinCategory, topology: Topology, max_size: int = 3, budget: int = 200_000):
    for p in enumerate_presheaves(base, max_size, budget):
        ok, _ = is_sheaf(p, topology)
        if ok:
            yield p


def unit_universal_property(p: Presheaf, topology: Topology, target: Presheaf) -> tuple[bool, tuple]:
    """Every map p -> target (a sheaf) factors uniquely through the unit."""
    sh = sheafify(p, topology)
    factorisations = list(presheaf_morphisms(sh.sheaf, target))
    for m in presheaf_morphisms(p, target):
        hits = [h for h in factorisations if compose_morphisms(p, h, sh.unit) == m]
        if len(hits) != 1:
            return False, ("factorisations", len(hits), tuple(sorted((c, tuple(sorted(v.items()))) for c, v in m.items())))
    return True, ()


def prop33_pullback_data(projection: FinFunctor, d_prime: str, u_prime: str, f_prime: str):
    """The presheaf of pairs (g: e -> d', u'': p(e) -> c'') with f'.u'' = u'.p(g),
    together with the decoding of element names back to pairs."""
    dcat = projection.source
    ccat = projection.target
    if ccat.src[u_prime] != projection.ob(d_prime):
        raise StructureError("u' must start at the projection of d'")
    if ccat.tgt[u_prime] != ccat.tgt[f_prime]:
        raise StructureError("u' and f' must share a target")
    c2 = ccat.src[f_prime]
    values = {}
    elems: dict[str, dict[str, tuple[str, str]]] = {}
    for e in dcat.objects:
        here = {}
        for g in dcat.hom(e, d_prime):
            for u2 in ccat.hom(projection.ob(e), c2):
                if ccat.compose(f_prime, u2) == ccat.compose(u_prime, projection.ar(g)):
                    here["({},{})".format(g, u2)] = (g, u2)
        values[e] = tuple(sorted(here))
        elems[e] = here
    action = {}
    for h in dcat.arrows:
        s, t = dcat.src[h], dcat.tgt[h]
        m = {}
        for name in values[t]:
            g, u2 = elems[t][name]
            m[name] = "({},{})".format(dcat.compose(g, h), ccat.compose(u2, projection.ar(h)))
        action[h] = m
    return validate_presheaf(dcat, values, action), elems


def prop33_pullback_presheaf(projection: FinFunctor, d_prime: str, u_prime: str, f_prime: str) -> Presheaf:
    return prop33_pullback_data(projection, d_prime, u_prime, f_prime)[0]


@dataclass(frozen=True)
class ElementsOfPresheaf:
    category: FinCategory
    projection: FinFunctor
    obj_data: dict[str, tuple[str, str]]


def elements_of_presheaf(p: Presheaf) -> ElementsOfPresheaf:
    """Objects are pairs (c, element of p(c)); arrows are base arrows whose
    action carries the target element back to the source one."""
    base = p.base
    obj_data = {}
    for c in base.objects:
        for a in p.values[c]:
            obj_data["<{}|{}>".format(c, a)] = (c, a)
    names = tuple(sorted(obj_data))
    arrows = {}
    data = {}
    for o1 in names:
        c1, a1 = obj_data[o1]
        for o2 in names:
            c2, a2 = obj_data[o2]
            for h in base.hom(c1, c2):
                if p.act(h, a2) == a1:
                    name = "{}@{}->{}".format(h, o1, o2)
                    arrows[name] = (o1, o2)
                    data[name] = h
    identity = {}
    for o in names:
        c, _ = obj_data[o]
        identity[o] = "{}@{}->{}".format(base.identity[c], o, o)
    table = {}
    for b, (bs, bt) in arrows.items():
        for a, (asrc, at) in arrows.items():
            if at == bs:
                table[(b, a)] = "{}@{}->{}".format(base.compose(data[b], data[a]), asrc, bt)
    cat = validate_category(names, arrows, identity, table)
    proj = validate_functor(
        {o: obj_data[o][0] for o in names}, {a: data[a] for a in arrows}, cat, base
    )
    return ElementsOfPresheaf(cat, proj, obj_data)
