import os
import subprocess
import sys

import pytest

from finsite import corpus
from finsite.bundles import (
    BundleError,
    load_bundle,
    save_bundle,
    workspace_to_json,
)
from finsite.cli import main


DATA = os.path.join(os.path.dirname(__file__), "..", "src", "finsite", "data")
WALK2_BUNDLE = os.path.join(DATA, "walk2.bundle")
CORPUS_BUNDLE = os.path.join(DATA, "corpus.bundle")


def test_shipped_walk2_bundle_loads(walk2, sier, two_point):
    ws = load_bundle(WALK2_BUNDLE)
    assert ws.categories["walk2"] == walk2
    assert ws.topologies["sier"] == sier
    assert ws.indexed["twopoint"].fiber == two_point.fiber


def test_shipped_bundles_match_the_programmatic_corpus(tmp_path):
    ws = corpus.corpus_workspace()
    path = tmp_path / "fresh.bundle"
    save_bundle(ws, str(path))
    assert load_bundle(str(path)) == load_bundle(CORPUS_BUNDLE)


def test_round_trip_is_identity():
    ws = load_bundle(CORPUS_BUNDLE)
    assert load_bundle(workspace_to_json(ws)) == ws


def test_missing_composite_is_located():
    doc = {
        "categories": {
            "chain": {
                "objects": ["x", "y", "z"],
                "arrows": {"f": ["x", "y"], "g": ["y", "z"], "h": ["x", "z"]},
                "compose": [],
            }
        }
    }
    with pytest.raises(BundleError, match="categories/chain"):
        load_bundle(doc)


def test_dangling_reference_is_located():
    doc = {
        "categories": {},
        "functors": {"f": {"source": "missing", "target": "missing", "objects": {}, "arrows": {}}},
    }
    with pytest.raises(BundleError, match="functors/f.*dangling"):
        load_bundle(doc)


def test_parse_error_is_reported(tmp_path):
    path = tmp_path / "broken.bundle"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(BundleError, match="parse error"):
        load_bundle(str(path))


def test_identity_composites_are_autofilled():
    doc = {
        "categories": {
            "w": {
                "objects": ["a", "b"],
                "arrows": {"u": ["a", "b"]},
                "compose": [],
            }
        }
    }
    ws = load_bundle(doc)
    assert ws.categories["w"].compose("u", "id_a") == "u"


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_cli_validate(capsys):
    code, out, _ = run_cli(["validate", WALK2_BUNDLE], capsys)
    assert code == 0
    assert "ok categories/walk2" in out
    assert "ok indexed/twopoint" in out


def test_cli_validate_unreadable(tmp_path, capsys):
    path = tmp_path / "broken.bundle"
    path.write_text("{not json", encoding="utf-8")
    code, _, err = run_cli(["validate", str(path)], capsys)
    assert code == 2
    assert "error" in err


def test_cli_check_comorphism_true(capsys):
    code, out, _ = run_cli(
        ["check", "comorphism", WALK2_BUNDLE, "p", "gir_twopoint", "sier"], capsys
    )
    assert code == 0
    assert out.startswith("true")


def test_cli_check_comorphism_false(capsys):
    code, out, _ = run_cli(
        ["check", "comorphism", WALK2_BUNDLE, "p", "trivial_total", "sier"], capsys
    )
    assert code == 1
    assert out.startswith("false")
    assert "witness" in out


def test_cli_check_unknown_name(capsys):
    code, _, err = run_cli(["check", "comorphism", WALK2_BUNDLE, "nope", "sier", "sier"], capsys)
    assert code == 2
    assert "unknown functor" in err


def test_cli_giraud_prints_trivial_total(capsys):
    code, out, _ = run_cli(["giraud", WALK2_BUNDLE, "twopoint", "trivial_walk2"], capsys)
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith("cover")]
    # trivial base topology gives only maximal covers on the 3-object total
    assert len(lines) == 3


def test_cli_sheafify_collapses_worked_example(capsys):
    code, out, _ = run_cli(["sheafify", WALK2_BUNDLE, "twofold", "sier"], capsys)
    assert code == 0
    assert "value a: {s0}" in out
    assert "value b: {s0}" in out


def test_cli_pullback(capsys):
    code, out, _ = run_cli(["pullback", WALK2_BUNDLE, "twopoint", "pick_b"], capsys)
    assert code == 0
    assert "fiber *: {x0, x1}" in out


def test_cli_prop_exit_codes(capsys):
    code, out, _ = run_cli(["prop", "comma-kernel", "--seed", "7", "--caps", "instances=5"], capsys)
    assert code == 0
    assert "failures 0" in out
    code, _, err = run_cli(["prop", "prop-9.9"], capsys)
    assert code == 2
    assert "unknown experiment" in err


def test_cli_fuzz_requires_all(capsys):
    code, _, err = run_cli(["fuzz"], capsys)
    assert code == 2


def test_cli_fuzz_all_small(capsys):
    code, out, _ = run_cli(["fuzz", "--all", "--seed", "3", "--caps", "instances=2"], capsys)
    assert code == 0
    assert out.count("--- trailer ---") == len(__import__("finsite.experiments", fromlist=["EXPERIMENTS"]).EXPERIMENTS)


@pytest.mark.parametrize("exp_id", ["def-2.5-minimality", "prop-4.6-dense", "sheafify-soundness"])
def test_cli_output_is_identical_across_hash_seeds(exp_id):
    env = dict(os.environ)
    outputs = []
    for hash_seed in ("1", "2"):
        env["PYTHONHASHSEED"] = hash_seed
        proc = subprocess.run(
            [sys.executable, "-m", "finsite.cli", "prop", exp_id, "--seed", "11", "--caps", "instances=8"],
            capture_output=True,
            text=True,
            env=env,
            cwd=os.path.dirname(DATA),
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1]


def test_cli_prop_accepts_short_alias(capsys):
    code, out, _ = run_cli(["prop", "prop-4.2", "--caps", "instances=3"], capsys)
    assert code == 0
    assert "experiment prop-4.2-comorphism" in out


def test_cli_caps_parse_error(capsys):
    code, _, err = run_cli(["prop", "comma-kernel", "--caps", "bogus=1"], capsys)
    assert code == 2
    assert "unknown cap" in err


def test_cli_fuzz_refuses_incomplete_coverage(monkeypatch, capsys):
    import finsite.cli as cli

    monkeypatch.setattr(cli, "coverage_gaps", lambda: ("some-result",))
    code, _, err = run_cli(["fuzz", "--all", "--caps", "instances=1"], capsys)
    assert code == 2
    assert "refusing" in err
