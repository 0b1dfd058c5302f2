import pytest

from finsite import corpus
from finsite.deciders import (
    Prop33Square,
    SiteFunctor,
    check_prop33_conditions,
    is_comorphism,
    is_continuous,
    is_cover_preserving,
    is_covering_flat,
    is_dense_morphism,
    is_morphism_of_sites,
    replay,
)
from finsite.fincat import (
    compose_functors,
    constant_functor,
    full_subcategory,
    identity_functor,
    identity_transform,
    terminal_category,
    validate_functor,
)
from finsite.fibration import (
    giraud_bundle,
    giraud_topology,
    grothendieck,
    total_functor,
    validate_indexed,
    validate_indexed_morphism,
)
from finsite.sieves import make_coverage, saturate, trivial_topology


@pytest.fixture
def giraud_two_point(two_point, sier):
    return giraud_bundle(two_point, sier)


def identity_site(cat, topology):
    return SiteFunctor(identity_functor(cat), topology, topology)


def test_comorphism_identity(walk2, sier):
    assert is_comorphism(identity_site(walk2, sier)).ok


def test_comorphism_giraud_projection(giraud_two_point, sier):
    sf = SiteFunctor(giraud_two_point.projection, giraud_two_point.giraud, sier)
    verdict = is_comorphism(sf)
    assert verdict.ok
    assert replay(verdict, sf)


def test_comorphism_fails_below_giraud(giraud_two_point, sier):
    sf = SiteFunctor(giraud_two_point.projection, trivial_topology(giraud_two_point.total), sier)
    verdict = is_comorphism(sf)
    assert not verdict.ok
    assert verdict.witness[1] == ("u",)
    assert replay(verdict, sf)


def test_cover_preserving_examples(walk2, one, sier):
    assert is_cover_preserving(identity_site(walk2, sier)).ok
    bang_site = SiteFunctor(corpus.bang(walk2), sier, trivial_topology(one))
    assert is_cover_preserving(bang_site).ok
    empty_covers = saturate(make_coverage(one, {"*": [[]]}))
    pick_site = SiteFunctor(corpus.pick(walk2, "a"), empty_covers, sier)
    verdict = is_cover_preserving(pick_site)
    assert not verdict.ok
    assert replay(verdict, pick_site)


def test_continuous_identity_and_giraud(walk2, sier, giraud_two_point):
    assert is_continuous(identity_site(walk2, sier)).ok
    sf = SiteFunctor(giraud_two_point.projection, giraud_two_point.giraud, sier)
    verdict = is_continuous(sf)
    assert verdict.ok
    assert replay(verdict, sf)


def test_fibration_morphism_is_continuous_between_giraud_sites(two_point, walk2, sier):
    one_fib = terminal_category()
    target = validate_indexed(
        walk2,
        {c: one_fib for c in walk2.objects},
        {"u": identity_functor(one_fib)},
    )
    comps = {c: constant_functor(two_point.fiber[c], one_fib, "*") for c in walk2.objects}
    morphism = validate_indexed_morphism(two_point, target, comps)
    src = grothendieck(two_point)
    tgt = grothendieck(target)
    a_fun = total_functor(morphism, src, tgt)
    sf = SiteFunctor(
        a_fun,
        giraud_topology(two_point, sier, src),
        giraud_topology(target, sier, tgt),
    )
    assert is_continuous(sf).ok


def test_covering_flat_identity(walk2, sier):
    assert is_covering_flat(identity_site(walk2, sier)).ok


def test_covering_flat_vacuous_when_empty_sieve_covers(walk2, one):
    everything = saturate(make_coverage(walk2, {c: [[]] for c in walk2.objects}))
    sf = SiteFunctor(corpus.pick(walk2, "a"), trivial_topology(one), everything)
    assert is_covering_flat(sf).ok


def test_covering_flat_fails_without_cone(walk2, one):
    sf = SiteFunctor(corpus.pick(walk2, "a"), trivial_topology(one), trivial_topology(walk2))
    verdict = is_covering_flat(sf)
    assert not verdict.ok
    assert verdict.witness[0] == "no_local_cone"
    assert verdict.witness[1] == "b"
    assert replay(verdict, sf)


def test_morphism_of_sites_identity_and_failure(walk2, one, sier):
    assert is_morphism_of_sites(identity_site(walk2, sier)).ok
    empty_covers = saturate(make_coverage(one, {"*": [[]]}))
    broken = SiteFunctor(corpus.pick(walk2, "a"), empty_covers, sier)
    verdict = is_morphism_of_sites(broken)
    assert not verdict.ok
    assert verdict.witness[0] == "not_cover_preserving"
    assert replay(verdict, broken)


def test_structure_functor_is_morphism_of_sites(one, walk2):
    from finsite.fibration import structure_functor
    from finsite.generate import pushforward_topology

    adj = corpus.walk2_terminal_adjunction()
    fib = corpus.discrete(("p", "q"))
    cix = validate_indexed(one, {"*": fib}, {})
    stf = structure_functor(cix, adj)
    j = trivial_topology(one)
    k = pushforward_topology(adj.right, j)
    sf = SiteFunctor(
        stf.composite,
        giraud_topology(cix, j),
        giraud_topology(stf.inverse.indexed, k),
    )
    assert is_morphism_of_sites(sf).ok


def test_dense_identity(walk2, sier):
    assert is_dense_morphism(identity_site(walk2, sier)).ok


def test_dense_full_subcategory_inclusion(retract):
    from finsite.sieves import induced_image_topology

    top = corpus.retract_topology(retract)
    sub = full_subcategory(retract, ["r"])
    inclusion = validate_functor({"r": "r"}, {"id_r": "id_r"}, sub, retract)
    induced = induced_image_topology(inclusion, top)
    verdict = is_dense_morphism(SiteFunctor(inclusion, induced, top))
    assert verdict.ok
    assert replay(verdict, SiteFunctor(inclusion, induced, top))


def test_dense_fails_for_non_covering_subcategory(walk2):
    sub = full_subcategory(walk2, ["a"])
    inclusion = validate_functor({"a": "a"}, {"id_a": "id_a"}, sub, walk2)
    sf = SiteFunctor(inclusion, trivial_topology(sub), trivial_topology(walk2))
    verdict = is_dense_morphism(sf)
    assert not verdict.ok
    assert verdict.witness[0] in ("not_locally_covered_by_images", "not_morphism_of_sites")
    assert replay(verdict, sf)


def test_dense_q_between_giraud_sites(retract):
    """Direct-image projection along a dense inclusion is again dense."""
    from finsite.fibration import direct_image
    from finsite.sieves import induced_image_topology

    top = corpus.retract_topology(retract)
    sub = full_subcategory(retract, ["r"])
    inclusion = validate_functor({"r": "r"}, {"id_r": "id_r"}, sub, retract)
    induced = induced_image_topology(inclusion, top)
    fib = corpus.discrete(("m0", "m1"))
    cix = validate_indexed(
        retract,
        {c: fib for c in retract.objects},
        {a: identity_functor(fib) for a in retract.arrows if not retract.is_identity(a)},
    )
    di = direct_image(cix, inclusion)
    sf = SiteFunctor(
        di.q,
        giraud_topology(di.indexed, induced, di.source),
        giraud_topology(cix, top, di.target),
    )
    assert is_dense_morphism(sf).ok


def _breaking_square(walk2, one, two_point):
    src = grothendieck(two_point)
    w_over_one = validate_indexed(one, {"*": walk2}, {})
    tgt = grothendieck(w_over_one)
    a_fun = validate_functor(
        {"(y,a)": "(a,*)", "(x0,b)": "(b,*)", "(x1,b)": "(b,*)"},
        {
            src.total.identity["(y,a)"]: tgt.total.identity["(a,*)"],
            src.total.identity["(x0,b)"]: tgt.total.identity["(b,*)"],
            src.total.identity["(x1,b)"]: tgt.total.identity["(b,*)"],
            "(id_y,u):(y,a)->(x0,b)": "(u,id_*):(a,*)->(b,*)",
            "(id_y,u):(y,a)->(x1,b)": "(u,id_*):(a,*)->(b,*)",
        },
        src.total,
        tgt.total,
    )
    gir_tgt = giraud_topology(w_over_one, trivial_topology(one), tgt)
    phi = identity_transform(compose_functors(tgt.projection, a_fun))
    return Prop33Square(a_fun, corpus.bang(walk2), phi, tgt.projection, src.projection, gir_tgt)


def test_prop33_identity_square(two_point, sier):
    bundle = grothendieck(two_point)
    gir = giraud_topology(two_point, sier, bundle)
    ident = identity_functor(bundle.total)
    phi = identity_transform(bundle.projection)
    square = Prop33Square(
        ident, identity_functor(sier.base), phi, bundle.projection, bundle.projection, gir
    )
    verdict = check_prop33_conditions(square)
    assert verdict.ok
    assert replay(verdict, square)


def test_prop33_fixed_base_morphism(two_point, walk2, sier):
    one_fib = terminal_category()
    target = validate_indexed(
        walk2,
        {c: one_fib for c in walk2.objects},
        {"u": identity_functor(one_fib)},
    )
    comps = {c: constant_functor(two_point.fiber[c], one_fib, "*") for c in walk2.objects}
    morphism = validate_indexed_morphism(two_point, target, comps)
    src = grothendieck(two_point)
    tgt = grothendieck(target)
    a_fun = total_functor(morphism, src, tgt)
    gir_tgt = giraud_topology(target, sier, tgt)
    phi = identity_transform(compose_functors(tgt.projection, a_fun))
    square = Prop33Square(
        a_fun, identity_functor(walk2), phi, tgt.projection, src.projection, gir_tgt
    )
    assert check_prop33_conditions(square).ok


def test_prop33_rejects_cartesian_breaking_functor(walk2, one, two_point):
    square = _breaking_square(walk2, one, two_point)
    verdict = check_prop33_conditions(square)
    assert not verdict.ok
    assert verdict.witness[0] == "no_local_triplets"
    assert verdict.witness[1][0] == "u"
    assert replay(verdict, square)
