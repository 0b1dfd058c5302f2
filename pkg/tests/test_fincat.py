
import pytest
from hypothesis import given, settings, strategies as st

from finsite import corpus
from finsite.fincat import (
    StructureError,
    arrow_category,
    build_category,
    check_adjunction,
    comma_category,
    compose_functors,
    connected_components,
    constant_functor,
    disjoint_union,
    full_subcategory,
    identity_functor,
    is_equivalence,
    natural_iso_search,
    functor_equal,
    validate_category,
    validate_functor,
    validate_transform,
)
from finsite.generate import gen_category, Caps, _rng


def test_terminal_category_is_valid(one):
    assert one.objects == ("*",)
    assert one.arrows == ("id_*",)


def test_walk2_is_valid(walk2):
    assert set(walk2.arrows) == {"u", "id_a", "id_b"}
    assert walk2.compose("u", "id_a") == "u"


def test_noncomposable_pair_is_rejected():
    arrows = {"u": ("a", "b"), "id_a": ("a", "a"), "id_b": ("b", "b")}
    table = {
        ("u", "id_a"): "u",
        ("id_b", "u"): "u",
        ("id_a", "id_a"): "id_a",
        ("id_b", "id_b"): "id_b",
        ("u", "u"): "u",
    }
    with pytest.raises(StructureError, match="non-composable pair"):
        validate_category(("a", "b"), arrows, {"a": "id_a", "b": "id_b"}, table)


def test_missing_composite_is_rejected():
    c3 = corpus.chain3()
    table = dict(c3.table)
    del table[("a1->a2", "a0->a1")]
    with pytest.raises(StructureError, match="left undefined"):
        validate_category(c3.objects, {a: (c3.src[a], c3.tgt[a]) for a in c3.arrows}, c3.identity, table)


def test_broken_unit_law_is_rejected():
    arrows = {"e": ("x", "x"), "id_x": ("x", "x")}
    table = {("e", "e"): "e", ("e", "id_x"): "e", ("id_x", "e"): "id_x", ("id_x", "id_x"): "id_x"}
    with pytest.raises(StructureError, match="unit law"):
        validate_category(("x",), arrows, {"x": "id_x"}, table)


def test_associativity_violation_is_reported():
    # two parallel endo-arrows with a deliberately twisted table
    arrows = {"f": ("x", "x"), "g": ("x", "x"), "id_x": ("x", "x")}
    table = {}
    for a in arrows:
        table[(a, "id_x")] = a
        table[("id_x", a)] = a
    table[("f", "f")] = "g"
    table[("f", "g")] = "f"
    table[("g", "f")] = "f"
    table[("g", "g")] = "f"
    with pytest.raises(StructureError, match="associativity|unit"):
        validate_category(("x",), arrows, {"x": "id_x"}, table)


def test_identity_functor_and_constant_functor(walk2, one):
    identity_functor(walk2)
    constant_functor(walk2, one, "*")


def test_functor_endpoint_mismatch_is_rejected(walk2):
    with pytest.raises(StructureError, match="endpoints|preserved"):
        validate_functor(
            {"a": "a", "b": "b"},
            {"u": "id_a", "id_a": "id_a", "id_b": "id_b"},
            walk2,
            walk2,
        )


def brute_force_comma_objects(f_leg, g_leg):
    amb = f_leg.target
    out = set()
    for d in f_leg.source.objects:
        for d2 in g_leg.source.objects:
            for u in amb.arrows:
                if amb.src[u] == f_leg.ob(d) and amb.tgt[u] == g_leg.ob(d2):
                    out.add((d, d2, u))
    return out


def test_comma_identity_over_one(one):
    cc = comma_category(identity_functor(one), identity_functor(one))
    assert len(cc.category.objects) == 1
    assert len(cc.category.arrows) == 1


def test_comma_pick_b_against_identity(walk2, one):
    pick_b = constant_functor(one, walk2, "b")
    cc = comma_category(pick_b, identity_functor(walk2))
    assert set(cc.obj_data.values()) == brute_force_comma_objects(pick_b, identity_functor(walk2))
    # only arrows out of b exist: id_b
    assert len(cc.category.objects) == 1


def test_comma_identity_against_pick_b(walk2, one):
    pick_b = constant_functor(one, walk2, "b")
    cc = comma_category(identity_functor(walk2), pick_b)
    assert set(cc.obj_data.values()) == brute_force_comma_objects(identity_functor(walk2), pick_b)
    assert len(cc.category.objects) == 2
    non_id = [a for a in cc.category.arrows if not cc.category.is_identity(a)]
    assert len(non_id) == 1


def _comma_matches_arrow_category(cat):
    ac = arrow_category(cat)
    ident = identity_functor(cat)
    cc = comma_category(ident, ident)
    obj_map = {name: ac.of_arrow[u] for name, (_, _, u) in cc.obj_data.items()}
    arr_map = {}
    for name, (w1, w2) in cc.arr_data.items():
        o1, o2 = cc.category.src[name], cc.category.tgt[name]
        arr_map[name] = "[{},{}]:{}->{}".format(w1, w2, obj_map[o1], obj_map[o2])
    iso = validate_functor(obj_map, arr_map, cc.category, ac.category)
    assert sorted(obj_map.values()) == sorted(ac.category.objects)
    assert sorted(arr_map.values()) == sorted(ac.category.arrows)
    assert functor_equal(compose_functors(ac.dom, iso), cc.left)
    assert functor_equal(compose_functors(ac.cod, iso), cc.right)


def test_comma_of_identities_is_the_arrow_category(walk2, retract):
    _comma_matches_arrow_category(walk2)
    _comma_matches_arrow_category(retract)


def test_connected_components_examples(one, walk2):
    assert connected_components(one) == (("*",),)
    assert connected_components(walk2) == (("a", "b"),)
    two = disjoint_union(one, one)
    assert len(connected_components(two)) == 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_connected_components_match_graph_reachability(seed):
    cat, _, _ = gen_category(_rng(seed), Caps())
    neighbours = {c: set() for c in cat.objects}
    for a in cat.arrows:
        neighbours[cat.src[a]].add(cat.tgt[a])
        neighbours[cat.tgt[a]].add(cat.src[a])
    groups = []
    seen = set()
    for c in cat.objects:
        if c in seen:
            continue
        stack, group = [c], set()
        while stack:
            x = stack.pop()
            if x not in group:
                group.add(x)
                stack.extend(neighbours[x] - group)
        seen |= group
        groups.append(tuple(sorted(group)))
    assert tuple(sorted(groups)) == tuple(sorted(connected_components(cat)))


def test_check_adjunction_identity(walk2):
    ident = identity_functor(walk2)
    unit = {c: walk2.identity[c] for c in walk2.objects}
    assert check_adjunction(ident, ident, unit, unit)


def test_check_adjunction_terminal_object(walk2, one):
    bang = corpus.bang(walk2)
    pick_b = corpus.pick(walk2, "b")
    assert check_adjunction(bang, pick_b, {"a": "u", "b": "id_b"}, {"*": "id_*"})


def test_check_adjunction_fails_for_pick_a(walk2):
    bang = corpus.bang(walk2)
    pick_a = corpus.pick(walk2, "a")
    assert not check_adjunction(bang, pick_a, {"a": "u", "b": "id_b"}, {"*": "id_*"})
    # even the only well-typed candidate unit fails: a is not terminal
    assert not check_adjunction(bang, pick_a, {"a": "id_a", "b": "id_b"}, {"*": "id_*"})


def _assert_hom_bijection(adj):
    left, right = adj.left, adj.right
    ccat, dcat = left.source, left.target
    for c in ccat.objects:
        for d in dcat.objects:
            down = list(dcat.hom(left.ob(c), d))
            up = list(ccat.hom(c, right.ob(d)))
            transpose = {u: ccat.compose(right.ar(u), adj.unit[c]) for u in down}
            back = {v: dcat.compose(adj.counit[d], left.ar(v)) for v in up}
            assert sorted(transpose.values()) == sorted(up)
            assert all(back[transpose[u]] == u for u in down)


def test_accepted_adjunction_gives_hom_bijection(walk2, one):
    _assert_hom_bijection(corpus.walk2_terminal_adjunction())


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_fuzzed_galois_connections_give_hom_bijections(seed):
    from finsite.generate import gen_galois

    adj = gen_galois(_rng(seed), Caps())
    if adj is not None:
        assert check_adjunction(adj.left, adj.right, adj.unit, adj.counit)
        _assert_hom_bijection(adj)


def test_is_equivalence_identity(walk2):
    ok, witness = is_equivalence(identity_functor(walk2))
    assert ok and witness[0] == "essential_preimages"


def test_is_equivalence_rejects_collapse(walk2, one):
    ok, witness = is_equivalence(corpus.bang(walk2))
    assert not ok
    assert witness[0] == "not_full"


def test_is_equivalence_accepts_skeleton_inclusion():
    iso2 = corpus.iso2()
    sub = full_subcategory(iso2, ["y"])
    inclusion = validate_functor({"y": "y"}, {"id_y": "id_y"}, sub, iso2)
    ok, witness = is_equivalence(inclusion)
    assert ok
    preimages = dict(witness[1])
    assert "z" in preimages


def test_natural_iso_search_finds_identity(walk2):
    ident = identity_functor(walk2)
    iso = natural_iso_search(ident, ident)
    assert iso == {c: walk2.identity[c] for c in walk2.objects}


def test_natural_transform_validation(walk2, one):
    bang = corpus.bang(walk2)
    pick_b = corpus.pick(walk2, "b")
    composite = compose_functors(pick_b, bang)
    validate_transform({"a": "u", "b": "id_b"}, identity_functor(walk2), composite)
    with pytest.raises(StructureError):
        validate_transform({"a": "id_a", "b": "id_b"}, identity_functor(walk2), composite)


def test_category_caps_enforced():
    objects = ["o{}".format(i) for i in range(5)]
    with pytest.raises(StructureError, match="cap"):
        build_category(objects, {}, max_objects=4)


def test_retract_composition_table(retract):
    assert retract.compose("e", "m") == "id_r"
    assert retract.compose("m", "e") == "t"
    assert retract.compose("t", "t") == "t"
    assert not retract.is_iso("t")
    assert retract.is_iso("id_r")
