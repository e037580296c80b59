"""Command-line entry point: generate clouds, profile maps, reproduce claims.

Exit codes: 0 success, 1 a claim check failed, 2 invalid specification or
budget overflow, 3 I/O or schema error. All outputs are deterministic given
the inputs; nothing in an artifact depends on wall-clock time or thread
scheduling.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any

from ._config import DEFAULT_KAPPA, DEFAULT_RATIO
from .errors import ClaimFailure, SchemaError, SpecError
from .experiments import available, run_experiment
from .generators import SpaceSpec, build_space
from .lightness import ll_profile
from .metric import ScaleLadder
from .serialization import (
    dump_json,
    load_json,
    load_map,
    load_space,
    write_profile,
    write_report,
    write_space,
)

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_CLAIM = 1
EXIT_SPEC = 2
EXIT_SCHEMA = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lipdim",
        description="Generate point clouds, profile sampled maps, reproduce named claim checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="materialize a space from a spec file")
    gen.add_argument("--spec", required=True, help="space spec JSON file")
    gen.add_argument("--out-dir", required=True, help="output directory")
    gen.add_argument("--name", default="cloud", help="basename for the output files")
    gen.add_argument("--seed", type=int, default=None, help="override the spec's seed")

    prof = sub.add_parser("profile", help="profile a map over a stored space")
    prof.add_argument("--space", required=True, help="space sidecar JSON from 'generate'")
    prof.add_argument("--map", required=True, help="map spec JSON or value-table CSV")
    prof.add_argument("--out-dir", required=True, help="output directory")
    prof.add_argument("--name", default="profile", help="basename for the output files")
    prof.add_argument("--ladder-ratio", type=float, default=DEFAULT_RATIO,
                      help="geometric ratio between consecutive scales")
    prof.add_argument("--kappa", type=float, default=DEFAULT_KAPPA,
                      help="certification floor multiplier over the resolution")
    prof.add_argument("--windows", choices=["ball", "grid", "diam"], default=None,
                      help="window family (default: chosen from the codomain)")
    prof.add_argument("--threads", type=int, default=1,
                      help="worker threads (outputs are independent of this)")

    rep = sub.add_parser("reproduce", help="run a named claim-check experiment")
    rep.add_argument("experiment", nargs="?", default=None,
                     help="experiment name (omit to list)")
    rep.add_argument("--out-dir", default=None, help="where to write the verdict table")

    return parser


def _cmd_generate(args: argparse.Namespace) -> int:
    data = load_json(args.spec)
    spec = SpaceSpec.from_dict(data)
    if args.seed is not None:
        spec = SpaceSpec(spec.kind, spec.params, seed=args.seed)
    space = build_space(spec)
    csv_path, json_path = write_space(space, args.out_dir, args.name, spec=spec)
    print(f"wrote {csv_path} ({space.n} points) and {json_path}")
    return EXIT_OK


def _cmd_profile(args: argparse.Namespace) -> int:
    space = load_space(args.space)
    m = load_map(space, args.map)
    if space.resolution is None:
        raise SpecError("stored space has no resolution; cannot certify a ladder")
    ladder = ScaleLadder.for_space(space, ratio=args.ladder_ratio, kappa=args.kappa)
    profile = ll_profile(
        m, ladder=ladder, windows=args.windows, threads=args.threads, kappa=args.kappa
    )
    json_path, csv_path = write_profile(profile, args.out_dir, args.name)
    print(
        f"{m.name}: {profile.classification}"
        + (f" (slope {profile.slope:+.3f})" if profile.slope is not None else "")
        + f", sup C = {profile.lightness_constant():.6g}"
    )
    print(f"wrote {json_path} and {csv_path}")
    return EXIT_OK


def _cmd_reproduce(args: argparse.Namespace) -> int:
    if args.experiment is None:
        print("available experiments:")
        for name in available():
            print(f"  {name}")
        return EXIT_OK
    result = run_experiment(args.experiment)
    for row in result["rows"]:
        flag = "PASS" if row["passed"] else "FAIL"
        print(f"[{flag}] {row['claim']}: measured {row['measured']}, bound {row['bound']}")
    if args.out_dir:
        json_path, csv_path = write_report(
            args.experiment, result["rows"], args.out_dir, basename=args.experiment
        )
        print(f"wrote {json_path} and {csv_path}")
    if not result["passed"]:
        raise ClaimFailure(f"experiment {args.experiment!r} has failing rows")
    print(f"{args.experiment}: all {len(result['rows'])} claims hold")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "profile":
            return _cmd_profile(args)
        if args.command == "reproduce":
            return _cmd_reproduce(args)
        parser.error(f"unknown command {args.command!r}")
    except ClaimFailure as exc:
        print(f"claim failure: {exc}", file=sys.stderr)
        return EXIT_CLAIM
    except SpecError as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
