"""Command-line surface: validate bundles, run checkers and experiments.

Exit codes: 0 all assertions passed, 1 assertion failure (witness printed),
2 input error.  All tabular output is sorted; two runs on the same inputs
produce identical bytes.
"""
from __future__ import annotations

import argparse
import sys

from .bundles import BundleError, Workspace, load_bundle
from .deciders import (
    SiteFunctor,
    is_comorphism,
    is_continuous,
    is_cover_preserving,
    is_covering_flat,
    is_dense_morphism,
    is_morphism_of_sites,
)
from .experiments import (
    EXPERIMENTS,
    all_experiment_ids,
    coverage_gaps,
    resolve_experiment_id,
    run_experiment,
)
from .fincat import StructureError
from .fibration import direct_image, giraud_topology
from .generate import Caps
from .presheaf import sheafify
from .sieves import Topology

CHECK_KINDS = {
    "comorphism": is_comorphism,
    "cover": is_cover_preserving,
    "continuous": is_continuous,
    "flat": is_covering_flat,
    "site-morphism": is_morphism_of_sites,
    "dense": is_dense_morphism,
}


class InputError(Exception):
    pass


def _load(path: str) -> Workspace:
    try:
        return load_bundle(path)
    except (BundleError, OSError) as err:
        raise InputError(str(err))


def _lookup(table: dict, name: str, kind: str):
    if name not in table:
        raise InputError("unknown {} {!r}; known: {}".format(kind, name, ", ".join(sorted(table))))
    return table[name]


def _print_topology(topology: Topology, out) -> None:
    for obj in sorted(topology.base.objects):
        sieves = sorted(topology.covers[obj], key=lambda s: (len(s), tuple(sorted(s))))
        for sieve in sieves:
            out.write("cover {}: {{{}}}\n".format(obj, ", ".join(sorted(sieve))))


def cmd_validate(args, out) -> int:
    ws = _load(args.bundle)
    for section in ("categories", "topologies", "indexed", "functors", "naturals", "presheaves"):
        for name in sorted(getattr(ws, section)):
            out.write("ok {}/{}\n".format(section, name))
    return 0


def cmd_giraud(args, out) -> int:
    ws = _load(args.bundle)
    cix = _lookup(ws.indexed, args.indexed, "indexed category")
    topology = _lookup(ws.topologies, args.topology, "topology")
    if topology.base != cix.base:
        raise InputError("topology {!r} does not live on the base of {!r}".format(args.topology, args.indexed))
    giraud = giraud_topology(cix, topology)
    _print_topology(giraud, out)
    return 0


def cmd_check(args, out) -> int:
    ws = _load(args.bundle)
    functor = _lookup(ws.functors, args.functor, "functor")
    src_top = _lookup(ws.topologies, args.src_topology, "topology")
    tgt_top = _lookup(ws.topologies, args.tgt_topology, "topology")
    try:
        site = SiteFunctor(functor, src_top, tgt_top)
    except StructureError as err:
        raise InputError(str(err))
    verdict = CHECK_KINDS[args.kind](site)
    out.write("{}\n".format("true" if verdict.ok else "false"))
    if verdict.ok:
        out.write("trace entries: {}\n".format(len(verdict.trace)))
    else:
        out.write("witness: {}\n".format(verdict.witness))
    return 0 if verdict.ok else 1


def cmd_sheafify(args, out) -> int:
    ws = _load(args.bundle)
    presheaf = _lookup(ws.presheaves, args.presheaf, "presheaf")
    topology = _lookup(ws.topologies, args.topology, "topology")
    if topology.base != presheaf.base:
        raise InputError("topology and presheaf live on different categories")
    result = sheafify(presheaf, topology)
    for obj in sorted(presheaf.base.objects):
        out.write("value {}: {{{}}}\n".format(obj, ", ".join(result.sheaf.values[obj])))
    for obj in sorted(presheaf.base.objects):
        for elem in presheaf.values[obj]:
            out.write("unit {}: {} -> {}\n".format(obj, elem, result.unit[obj][elem]))
    for arrow in sorted(presheaf.base.arrows):
        if presheaf.base.is_identity(arrow):
            continue
        action = result.sheaf.action[arrow]
        for elem in result.sheaf.values[presheaf.base.tgt[arrow]]:
            out.write("action {}: {} -> {}\n".format(arrow, elem, action[elem]))
    return 0


def cmd_pullback(args, out) -> int:
    ws = _load(args.bundle)
    cix = _lookup(ws.indexed, args.indexed, "indexed category")
    functor = _lookup(ws.functors, args.functor, "functor")
    if functor.target != cix.base:
        raise InputError("functor {!r} does not land in the base of {!r}".format(args.functor, args.indexed))
    di = direct_image(cix, functor)
    for c in sorted(di.indexed.base.objects):
        fib = di.indexed.fiber[c]
        out.write("fiber {}: {{{}}}\n".format(c, ", ".join(sorted(fib.objects))))
    for name in sorted(di.q.obj_map):
        out.write("q {} -> {}\n".format(name, di.q.obj_map[name]))
    return 0


def _caps(args) -> Caps:
    try:
        return Caps.parse(args.caps or "")
    except ValueError as err:
        raise InputError(str(err))


def cmd_prop(args, out) -> int:
    if resolve_experiment_id(args.id) not in EXPERIMENTS:
        raise InputError("unknown experiment {!r}; known: {}".format(args.id, ", ".join(all_experiment_ids())))
    report = run_experiment(args.id, args.seed, _caps(args))
    out.write(report.canonical_text())
    sys.stderr.write("# elapsed {:.2f}s\n".format(report.elapsed))
    return 0 if report.ok else 1


def cmd_fuzz(args, out) -> int:
    if not args.all:
        raise InputError("fuzz requires --all")
    gaps = coverage_gaps()
    if gaps:
        raise InputError("refusing to build a release report; uncovered: {}".format(", ".join(gaps)))
    caps = _caps(args)
    code = 0
    for exp_id in all_experiment_ids():
        report = run_experiment(exp_id, args.seed, caps)
        out.write(report.canonical_text())
        out.write("\n")
        sys.stderr.write("# {} elapsed {:.2f}s\n".format(exp_id, report.elapsed))
        if not report.ok:
            code = 1
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finsite", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a bundle and validate every entry")
    p.add_argument("bundle")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("giraud", help="print the Giraud topology of an indexed category")
    p.add_argument("bundle")
    p.add_argument("indexed")
    p.add_argument("topology")
    p.set_defaults(fn=cmd_giraud)

    p = sub.add_parser("check", help="run a site-functor decider")
    p.add_argument("kind", choices=sorted(CHECK_KINDS))
    p.add_argument("bundle")
    p.add_argument("functor")
    p.add_argument("src_topology")
    p.add_argument("tgt_topology")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("sheafify", help="sheafify a presheaf and print the tables")
    p.add_argument("bundle")
    p.add_argument("presheaf")
    p.add_argument("topology")
    p.set_defaults(fn=cmd_sheafify)

    p = sub.add_parser("pullback", help="pull an indexed category back along a functor")
    p.add_argument("bundle")
    p.add_argument("indexed")
    p.add_argument("functor")
    p.set_defaults(fn=cmd_pullback)

    p = sub.add_parser("prop", help="run one experiment and print its report")
    p.add_argument("id")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--caps", default="")
    p.set_defaults(fn=cmd_prop)

    p = sub.add_parser("fuzz", help="run every experiment (release report)")
    p.add_argument("--all", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--caps", default="")
    p.set_defaults(fn=cmd_fuzz)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, sys.stdout)
    except InputError as err:
        sys.stderr.write("error: {}\n".format(err))
        return 2
    except StructureError as err:
        sys.stderr.write("error: {}\n".format(err))
        return 2


if __name__ == "__main__":
    sys.exit(main())
