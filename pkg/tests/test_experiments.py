import pytest

from finsite.experiments import (
    EXPERIMENTS,
    coverage_gaps,
    run_experiment,
)
from finsite.generate import (
    Caps,
    GenerationError,
    KINDS,
    derive_seed,
    generate_instance,
    shrink_site,
)
from finsite.sieves import is_topology


SMALL = Caps(instances=12)


def test_every_in_scope_result_is_covered():
    assert coverage_gaps() == ()


def test_unknown_experiment_id_is_rejected():
    with pytest.raises(KeyError):
        run_experiment("prop-0.0")


def test_unknown_instance_kind_is_rejected():
    with pytest.raises(GenerationError):
        generate_instance("nonsense", 0, SMALL)


@pytest.mark.parametrize("kind", KINDS)
def test_generate_instance_is_valid_and_deterministic(kind):
    first = generate_instance(kind, 5, SMALL)
    second = generate_instance(kind, 5, SMALL)
    assert first.get("kind") == kind
    assert sorted(first) == sorted(second)
    if "category" in first:
        assert first["category"] == second["category"]
        ok, witness = is_topology(first["category"], first["topology"].covers)
        assert ok, witness
    if "functor" in first:
        assert first["functor"].obj_map == second["functor"].obj_map


@pytest.mark.parametrize("exp_id", sorted(EXPERIMENTS))
def test_experiments_pass_at_small_scale(exp_id):
    report = run_experiment(exp_id, 3, SMALL)
    assert report.ok, report.failures[0].message if report.failures else ""
    assert report.checked > 0


def test_reports_are_reproducible_byte_for_byte():
    for exp_id in ("comma-kernel", "def-2.5-minimality", "prop-4.2-comorphism"):
        first = run_experiment(exp_id, 9, SMALL)
        second = run_experiment(exp_id, 9, SMALL)
        assert first.canonical_text() == second.canonical_text()


def test_report_contains_machine_readable_trailer():
    report = run_experiment("comma-kernel", 2, SMALL)
    text = report.canonical_text()
    assert "--- trailer ---" in text
    trailer = text.split("--- trailer ---", 1)[1]
    fields = dict(
        line.split("=", 1) for line in trailer.strip().splitlines()
    )
    assert fields["id"] == "comma-kernel"
    assert fields["seed"] == "2"
    assert fields["failures"] == "0"
    assert "instances=12" in fields["caps"]


def test_elapsed_is_not_part_of_the_canonical_report():
    report = run_experiment("comma-kernel", 2, SMALL)
    assert "elapsed" not in report.canonical_text()
    assert "elapsed" in report.render(with_timing=True)


def test_shrinking_preserves_failure():
    inst = generate_instance("site", derive_seed(4, 2), Caps())
    cat, top = inst["category"], inst["topology"]
    if len(cat.objects) < 2:
        inst = generate_instance("site", derive_seed(4, 7), Caps())
        cat, top = inst["category"], inst["topology"]

    def fails(c, t):
        # synthetic failure: any site with at least one object
        return len(c.objects) >= 1

    small_cat, small_top = shrink_site(cat, top, fails)
    assert len(small_cat.objects) == 1
    assert fails(small_cat, small_top)
    ok, _ = is_topology(small_cat, small_top.covers)
    assert ok


def test_shrinking_respects_the_failure_predicate():
    inst = generate_instance("site", derive_seed(8, 3), Caps())
    cat, top = inst["category"], inst["topology"]

    def fails(c, t):
        # only sites containing every original object keep failing
        return set(cat.objects) <= set(c.objects)

    small_cat, _ = shrink_site(cat, top, fails)
    assert set(small_cat.objects) == set(cat.objects)


def test_failure_records_render_with_minimized_instance():
    # run a doctored experiment through the internal loop machinery
    from finsite.experiments import _Run

    run = _Run(seed=0, caps=Caps(instances=3))

    def make(i):
        return generate_instance("site", derive_seed(0, i), Caps())

    def check(inst):
        return "synthetic failure" if len(inst["category"].objects) >= 1 else None

    run.loop(make, check)
    assert len(run.failures) == 3
    assert all(f.minimized for f in run.failures)
