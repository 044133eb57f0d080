"""Command-line entry point exposing every module over files.

Every run prints a JSON report to stdout:
``{"command", "inputs", "seed", "outputs", "version", "timestamp"}``
where ``inputs`` maps each input path to its SHA-256 digest and ``seed``
records the seed actually used (stochastic commands draw and record a
fresh random seed when none is given, so reruns are reproducible by
copying the reported value).

Exit codes: 0 success, 2 invalid input (the diagnostic on stderr names
the violated invariant), 3 internal inconsistency (a bug).

Conventions: CSV is headerless unless ``--header`` is passed; all
category/vertex indices are 0-based; relative output paths resolve under
``$INDETERMINATION_OUTDIR`` when that variable is set.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import secrets
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .association import ContingencyTable, chi_square, jv_index, jv_relational, relational_encode
from .continuous import ContinuousCoupling, cdf_eval, check_condition_continuous, density_eval
from .coupling import (
    Margin,
    check_condition_h,
    independence_coupling,
    indetermination_coupling,
    is_full_monge,
)
from .errors import IndeterminationError
from .graphs import (
    global_score,
    local_weights_indetermination,
    local_weights_independence,
    louvain_detailed,
)
from .guessing import (
    GuessingInstance,
    Strategy,
    lower_bound_generalized,
    one_shot,
    one_shot_bounds_margin_strategy,
    rho_moment,
)
from .io import (
    FLOAT_FORMAT,
    read_density_json,
    read_graph_csv,
    read_joint_json,
    read_margin_csv,
    read_matrix_csv,
    read_vector_csv,
    joint_to_dict,
)
from .sampling import GENERATOR_VERSION, decompose, draw, empirical_joint
from .tasks import TaskPartition, class_size_moment, partition_moment_bound, partition_one_shot_bound

OUTDIR_ENV = "INDETERMINATION_OUTDIR"

__all__ = ["main", "dispatch"]


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _out_path(name: str) -> Path:
    base = os.environ.get(OUTDIR_ENV, "")
    path = Path(name)
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(63)


def _print_report(command: str, input_paths: list[str], outputs: dict,
                  seed: int | None) -> None:
    report = {
        "command": command,
        "inputs": {str(p): _digest(p) for p in input_paths},
        "seed": seed,
        "outputs": outputs,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    print(json.dumps(report, sort_keys=True))


def _print_csv(matrix) -> None:
    np.savetxt(sys.stdout, np.atleast_2d(np.asarray(matrix, dtype=float)),
               fmt=FLOAT_FORMAT, delimiter=",")


def _cmd_couple(args) -> int:
    mu = read_margin_csv(args.mu, header=args.header)
    nu = read_margin_csv(args.nu, header=args.header)
    condition = check_condition_h(mu, nu)
    if args.kind in ("x", "independence"):
        pi = independence_coupling(mu, nu)
        feasible = True
        kind = "independence"
    else:
        out = indetermination_coupling(mu, nu, strict=args.strict)
        feasible = getattr(out, "feasible", True)
        pi = out
        kind = "indetermination"
    if args.csv:
        _print_csv(pi.cells)
        return 0
    outputs = {
        "kind": kind,
        "cells": pi.cells.tolist(),
        "feasible": feasible,
        "condition_h": condition,
    }
    _print_report("couple", [args.mu, args.nu], outputs, None)
    return 0


def _cmd_check_monge(args) -> int:
    m = read_matrix_csv(args.matrix, header=args.header)
    outputs = {"full_monge": is_full_monge(m, rel_tol=args.rel_tol)}
    _print_report("check-monge", [args.matrix], outputs, None)
    return 0


def _cmd_draw(args) -> int:
    mu = read_margin_csv(args.mu, header=args.header)
    nu = read_margin_csv(args.nu, header=args.header)
    seed = _resolve_seed(args)
    dec = decompose(mu, nu)
    batch = draw(dec, mu, args.count, seed, stream=args.stream)
    sidecar = {"seed": seed, "n": args.count, "generator_version": GENERATOR_VERSION}
    outputs: dict = dict(sidecar)
    if args.out:
        out = _out_path(args.out)
        np.savetxt(out, batch.pairs, fmt="%d", delimiter=",")
        out.with_suffix(out.suffix + ".json").write_text(
            json.dumps(sidecar, sort_keys=True) + "\n", encoding="utf-8")
        outputs["pairs_file"] = str(out)
    else:
        np.savetxt(sys.stdout, batch.pairs, fmt="%d", delimiter=",")
    if args.histogram:
        hist = empirical_joint(batch, len(mu), len(nu))
        outputs["histogram"] = joint_to_dict(hist)
    _print_report("draw", [args.mu, args.nu], outputs, seed)
    return 0


def _cmd_criteria(args) -> int:
    if args.relational:
        if not (args.labels_x and args.labels_y):
            raise IndeterminationError(
                "--relational needs --labels-x and --labels-y")
        lx = read_vector_csv(args.labels_x, header=args.header).astype(int)
        ly = read_vector_csv(args.labels_y, header=args.header).astype(int)
        p = args.p if args.p else int(lx.max()) + 1
        q = args.q if args.q else int(ly.max()) + 1
        value = jv_relational(relational_encode(lx), relational_encode(ly), p, q)
        _print_report("criteria", [args.labels_x, args.labels_y],
                      {"jv_relational": value, "p": p, "q": q}, None)
        return 0
    if not args.table:
        raise IndeterminationError("criteria needs --table (or --relational)")
    table = ContingencyTable(read_matrix_csv(args.table, header=args.header))
    jv = jv_index(table)
    outputs = {
        "chi2": chi_square(table, drop_empty=args.drop_empty),
        "jv_contingency": jv.value,
        "jv_numerator": jv.numerator,
        "jv_denominator": jv.denominator,
        "jv_normalized": jv.normalized,
    }
    _print_report("criteria", [args.table], outputs, None)
    return 0


def _cmd_cluster(args) -> int:
    graph = read_graph_csv(args.edges, header=args.header)
    if args.criterion == "x":
        weights = local_weights_independence(graph)
    else:
        weights = local_weights_indetermination(graph)
    seed = _resolve_seed(args)
    part, passes = louvain_detailed(weights, seed, max_passes=args.max_passes)
    labels = part.canonical()
    score = global_score(weights, part, include_diagonal=not args.no_diagonal)
    if args.labels_out:
        out = _out_path(args.labels_out)
        np.savetxt(out, labels[None, :], fmt="%d", delimiter=",")
    else:
        print(",".join(str(int(c)) for c in labels))
    outputs = {
        "score": score,
        "passes": passes,
        "criterion": args.criterion,
        "n_classes": int(labels.max()) + 1,
        "labels": [int(c) for c in labels],
        "diagonal_included": not args.no_diagonal,
    }
    _print_report("cluster", [args.edges], outputs, seed)
    return 0


def _cmd_guess(args) -> int:
    pi = read_joint_json(args.pi)
    inst = GuessingInstance(pi, rho=args.rho)
    strategy = Strategy.sorted_by_posterior() if args.strategy == "max" \
        else Strategy.random_by_posterior()
    lower, upper = one_shot_bounds_margin_strategy(pi)
    outputs = {
        "strategy": args.strategy,
        "rho": args.rho,
        "rho_moment": rho_moment(inst, strategy),
        "one_shot": one_shot(inst, strategy),
        "lower_bound_generalized": lower_bound_generalized(pi, args.rho),
        "one_shot_lower": lower,
        "one_shot_upper": upper,
    }
    _print_report("guess", [args.pi], outputs, None)
    return 0


def _cmd_tasks(args) -> int:
    mu = read_margin_csv(args.mu, header=args.header)
    assignment = read_vector_csv(args.assign, header=args.header).astype(int)
    part = TaskPartition(assignment)
    bounds = partition_one_shot_bound(mu, part)
    outputs = {
        "rho": args.rho,
        "moment": class_size_moment(mu, part, args.rho),
        "moment_bound": partition_moment_bound(mu, part.n_workers, args.rho),
        "one_shot": bounds.m_value,
        "bound_piA": bounds.bound_piA,
        "bound_indet": bounds.bound_indet,
        "indetermination_feasible": bounds.indetermination_feasible,
    }
    _print_report("tasks", [args.mu, args.assign], outputs, None)
    return 0


def _cmd_continuous(args) -> int:
    f = read_density_json(args.f)
    g = read_density_json(args.g)
    feasible = check_condition_continuous(f, g)
    outputs: dict = {"feasible": feasible, "grid": args.grid}
    if feasible:
        coupling = ContinuousCoupling(f, g)
        (a, end_a), (b, end_b) = coupling.supports
        us = np.linspace(a, end_a, args.grid)
        vs = np.linspace(b, end_b, args.grid)
        grid_u, grid_v = np.meshgrid(us, vs, indexing="ij")
        density = density_eval(coupling, grid_u, grid_v)
        cdf = cdf_eval(coupling, grid_u, grid_v)
        density_path = _out_path(args.density_out)
        cdf_path = _out_path(args.cdf_out)
        np.savetxt(density_path, density, fmt=FLOAT_FORMAT, delimiter=",")
        np.savetxt(cdf_path, cdf, fmt=FLOAT_FORMAT, delimiter=",")
        outputs["files"] = {"density": str(density_path), "cdf": str(cdf_path)}
    _print_report("continuous", [args.f, args.g], outputs, None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="indetermination",
        description="Couplings with fixed margins: build, test, sample, score.")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    def common(p):
        p.add_argument("--header", action="store_true",
                       help="CSV inputs carry a single header line")

    p = sub.add_parser("couple", help="build a coupling from two margin CSVs")
    p.add_argument("--kind", required=True,
                   choices=["x", "plus", "independence", "indetermination"])
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--no-strict", dest="strict", action="store_false",
                   help="return the signed closed form when infeasible")
    p.add_argument("--csv", action="store_true",
                   help="print the cells as CSV instead of the JSON report")
    common(p)
    p.set_defaults(func=_cmd_couple)

    p = sub.add_parser("check-monge", help="test the adjacent 2x2 cross-sum equality")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rel-tol", type=float, default=1e-9)
    common(p)
    p.set_defaults(func=_cmd_check_monge)

    p = sub.add_parser("draw", help="sample exactly from the indetermination coupling")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("-n", "--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", default=None,
                   help="write pairs CSV here (plus .json sidecar) instead of stdout")
    p.add_argument("--histogram", action="store_true",
                   help="include the empirical joint distribution in the report")
    common(p)
    p.set_defaults(func=_cmd_draw)

    p = sub.add_parser("criteria", help="association indices of a contingency table")
    p.add_argument("--table", default=None)
    p.add_argument("--drop-empty", action="store_true",
                   help="drop all-zero rows/columns instead of erroring")
    p.add_argument("--relational", action="store_true",
                   help="relational cosine of two label files instead")
    p.add_argument("--labels-x", default=None)
    p.add_argument("--labels-y", default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_criteria)

    p = sub.add_parser("cluster", help="cluster a weighted graph by local moves")
    p.add_argument("--edges", required=True, help="edge list CSV: i,j,weight")
    p.add_argument("--criterion", required=True, choices=["x", "plus"])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-passes", type=int, default=10)
    p.add_argument("--no-diagonal", action="store_true",
                   help="report the score without the i == j terms")
    p.add_argument("--labels-out", default=None)
    common(p)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("guess", help="guessing-problem moments and bounds")
    p.add_argument("--pi", required=True, help="joint distribution JSON")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--strategy", choices=["max", "margin"], default="max")
    p.set_defaults(func=_cmd_guess)

    p = sub.add_parser("tasks", help="task-partitioning moments and bounds")
    p.add_argument("--mu", required=True)
    p.add_argument("--assign", required=True,
                   help="CSV of 0-based worker indices, one per task")
    p.add_argument("--rho", type=float, default=1.0)
    common(p)
    p.set_defaults(func=_cmd_tasks)

    p = sub.add_parser("continuous", help="density/CDF grids of a continuous coupling")
    p.add_argument("--f", required=True, help="density JSON for the first margin")
    p.add_argument("--g", required=True, help="density JSON for the second margin")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--density-out", default="continuous_density.csv")
    p.add_argument("--cdf-out", default="continuous_cdf.csv")
    p.set_defaults(func=_cmd_continuous)

    return parser


def dispatch(argv) -> int:
    """Parse and run one command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (IndeterminationError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - indicates a bug
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
