import itertools

import pytest

from finsite import corpus
from finsite.fincat import StructureError, compose_functors, identity_functor
from finsite.presheaf import (
    amalgamations,
    elements_of_presheaf,
    is_sheaf,
    matching_families,
    plus,
    precompose,
    presheaf_morphisms,
    prop33_pullback_presheaf,
    representable,
    sheaf_targets,
    sheafify,
    unit_universal_property,
    validate_presheaf,
)
from finsite.sieves import trivial_topology


@pytest.fixture
def worked(walk2):
    return validate_presheaf(walk2, {"b": ("0", "1"), "a": ("*",)}, {"u": {"0": "*", "1": "*"}})


def brute_force_families(p, apex, sieve):
    """Independent oracle: filter raw assignments by pairwise compatibility."""
    base = p.base
    members = sorted(sieve)
    out = []
    for values in itertools.product(*(p.values[base.src[f]] for f in members)):
        fam = dict(zip(members, values))
        good = True
        for f in members:
            for g in base.into(base.src[f]):
                fg = base.compose(f, g)
                if fg in fam and p.act(g, fam[f]) != fam[fg]:
                    good = False
        if good:
            out.append(fam)
    return out


def test_presheaf_functoriality_is_validated(walk2):
    with pytest.raises(StructureError, match="identity action"):
        validate_presheaf(
            walk2,
            {"a": ("0", "1"), "b": ("x",)},
            {"u": {"x": "0"}, "id_a": {"0": "1", "1": "0"}, "id_b": {"x": "x"}},
        )


def test_matching_families_agree_with_brute_force(worked, walk2, sier):
    for c in walk2.objects:
        for sieve in sier.covers[c]:
            ours = matching_families(worked, c, sieve)
            oracle = brute_force_families(worked, c, sieve)
            assert sorted(map(sorted, (f.items() for f in ours))) == sorted(
                map(sorted, (f.items() for f in oracle))
            )


def test_everything_is_a_sheaf_for_the_trivial_topology(worked, walk2):
    ok, _ = is_sheaf(worked, trivial_topology(walk2))
    assert ok


def test_worked_example_is_not_a_sheaf(worked, sier):
    ok, witness = is_sheaf(worked, sier)
    assert not ok
    kind, (obj, sieve, fam, glue) = witness
    assert kind == "ambiguous_amalgamation"
    assert obj == "b"
    assert sieve == ("u",)
    assert len(glue) == 2


def test_representable_at_b_is_a_sier_sheaf(walk2, sier):
    yb = representable(walk2, "b")
    # oracle: count amalgamations for each brute-forced family
    for c in walk2.objects:
        for sieve in sier.covers[c]:
            for fam in brute_force_families(yb, c, sieve):
                assert len(amalgamations(yb, c, sieve, fam)) == 1
    ok, _ = is_sheaf(yb, sier)
    assert ok


def test_plus_on_trivial_topology_is_isomorphic(worked, walk2):
    result = plus(worked, trivial_topology(walk2))
    for c in walk2.objects:
        comp = result.unit[c]
        assert len(set(comp.values())) == len(worked.values[c]) == len(result.presheaf.values[c])


def test_plus_collapses_the_worked_example(worked, sier):
    result = plus(worked, sier)
    assert len(result.presheaf.values["b"]) == 1
    assert len(result.presheaf.values["a"]) == 1


def test_plus_of_separated_presheaf_is_a_sheaf(walk2, sier):
    separated = validate_presheaf(
        walk2, {"b": ("0",), "a": ("*", "+")}, {"u": {"0": "*"}}
    )
    ok, _ = is_sheaf(separated, sier)
    assert not ok
    once = plus(separated, sier)
    ok, _ = is_sheaf(once.presheaf, sier)
    assert ok


def test_sheafify_constant_singleton(worked, sier):
    result = sheafify(worked, sier)
    assert all(len(result.sheaf.values[c]) == 1 for c in worked.base.objects)


def test_sheafify_sheaf_input_has_iso_unit(walk2, sier):
    yb = representable(walk2, "b")
    result = sheafify(yb, sier)
    for c in walk2.objects:
        comp = result.unit[c]
        assert len(set(comp.values())) == len(yb.values[c]) == len(result.sheaf.values[c])


def test_sheafify_is_idempotent_up_to_iso(worked, sier):
    once = sheafify(worked, sier)
    twice = sheafify(once.sheaf, sier)
    for c in worked.base.objects:
        comp = twice.unit[c]
        assert len(set(comp.values())) == len(once.sheaf.values[c]) == len(twice.sheaf.values[c])


def test_unit_universal_property_on_walk2(worked, walk2, sier):
    for target in sheaf_targets(walk2, sier, max_size=3):
        ok, witness = unit_universal_property(worked, sier, target)
        assert ok, witness


def test_precompose_identity(worked, walk2):
    again = precompose(worked, identity_functor(walk2))
    assert again.values == worked.values
    assert again.action == worked.action


def test_precompose_pick_b(worked, walk2, one):
    restricted = precompose(worked, corpus.pick(walk2, "b"))
    assert restricted.values == {"*": ("0", "1")}


def test_precompose_respects_composition(worked, walk2, one):
    pick_b = corpus.pick(walk2, "b")
    bang = corpus.bang(walk2)
    left = precompose(worked, compose_functors(pick_b, bang))
    right = precompose(precompose(worked, pick_b), bang)
    assert left.values == right.values and left.action == right.action


def test_continuity_implies_sheaf_preservation_direction(walk2, one, sier):
    # bang: (walk2, sier) -> (one, trivial) is continuous; restriction of any
    # bounded sheaf downstairs is a sheaf upstairs
    from finsite.deciders import SiteFunctor, is_continuous

    bang = corpus.bang(walk2)
    sf = SiteFunctor(bang, sier, trivial_topology(one))
    assert is_continuous(sf).ok
    for q in sheaf_targets(one, trivial_topology(one), max_size=3):
        ok, _ = is_sheaf(precompose(q, bang), sier)
        assert ok


def test_prop33_pullback_along_identities(walk2):
    p = prop33_pullback_presheaf(identity_functor(walk2), "b", "id_b", "id_b")
    for e in walk2.objects:
        assert len(p.values[e]) == len(walk2.hom(e, "b"))


def test_prop33_pullback_with_empty_homs(walk2):
    # no arrows b -> a, so the pullback presheaf over d' = a is empty at b
    p = prop33_pullback_presheaf(identity_functor(walk2), "a", "id_a", "id_a")
    assert p.values["b"] == ()


def test_prop33_pullback_two_point_instance(two_point, walk2):
    from finsite.fibration import grothendieck

    bundle = grothendieck(two_point)
    proj = bundle.projection
    d_prime = "(x0,b)"
    p = prop33_pullback_presheaf(proj, d_prime, "id_b", "u")
    total = bundle.total
    for e in total.objects:
        expected = set()
        for g in total.hom(e, d_prime):
            for u2 in walk2.hom(proj.ob(e), "a"):
                if walk2.compose("u", u2) == walk2.compose("id_b", proj.ar(g)):
                    expected.add("({},{})".format(g, u2))
        assert set(p.values[e]) == expected


def test_elements_of_presheaf_projection(worked, walk2):
    el = elements_of_presheaf(worked)
    assert len(el.category.objects) == 3
    for name, (c, a) in el.obj_data.items():
        assert el.projection.ob(name) == c


def test_presheaf_morphism_enumeration_counts(walk2):
    singleton = validate_presheaf(walk2, {"a": ("*",), "b": ("*",)}, {"u": {"*": "*"}})
    pair = validate_presheaf(walk2, {"a": ("0", "1"), "b": ("0", "1")}, {"u": {"0": "0", "1": "1"}})
    maps = list(presheaf_morphisms(singleton, pair))
    assert len(maps) == 2
