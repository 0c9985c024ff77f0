"""Command-line front end.

Subcommands load and save the JSON envelopes defined in ``serialize``, run
conversions and checks, and execute the demo scenarios. Output is
deterministic given inputs, flags and seed. Exit codes: 0 success,
2 validation failure, 3 resource bound exceeded, 4 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import linalg, maps, serialize
from .channels import standard_channel, stinespring_dilate, random_cptp_map
from .channels import Dilation
from .maps import REPRESENTATION_NAMES
from .process_tensor import (
    ResourceLimitError,
    build_process_tensor,
    is_markov,
    non_markovianity,
    surprise,
)
from .tomography import ncp_demo, reconstruct_process_tensor

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3
EXIT_IO = 4


def _load(path: str) -> dict:
    return serialize.read_json(path)


def _truncated(dilation: Dilation, k: int | None) -> Dilation:
    if k is None:
        return dilation
    if not 1 <= k <= dilation.steps:
        raise ValueError(f"-k must lie in 1..{dilation.steps} for this dilation")
    if k == dilation.steps:
        return dilation
    return Dilation(dilation.d_s, dilation.d_e, dilation.initial_se, dilation.unitaries[:k])


# ------------------------------------------------------------- subcommands

def cmd_convert(args) -> tuple[dict, tuple[list[str], list[list]]]:
    m = serialize.map_from_json(_load(args.input))
    converted = maps.convert(m, args.to)
    residual = linalg.frobenius(maps.to_bform(m).matrix - maps.to_bform(converted).matrix)
    out = serialize.map_to_json(converted)
    out["meta"] = {"conversion_residual": residual, "source_repr": m.rep_name}
    table = (["source_repr", "target_repr", "residual"], [[m.rep_name, args.to, residual]])
    return out, table


def cmd_check(args) -> tuple[dict, tuple[list[str], list[list]]]:
    m = serialize.map_from_json(_load(args.input))
    tol = args.tol
    tp, tp_residual = maps.check_tp(m, tol)
    hp = maps.check_hp(m, tol)
    cp, min_eig = maps.check_cp(m, tol)
    rank = maps.kraus_rank(m, tol) if cp else None
    report = {
        "tp": tp,
        "tp_residual": tp_residual,
        "hp": hp,
        "cp": cp,
        "min_eig": min_eig,
        "kraus_rank": rank,
        "tolerance": tol,
    }
    header = ["tp", "hp", "cp", "min_eig", "kraus_rank", "tp_residual"]
    return report, (header, [[tp, hp, cp, min_eig, rank, tp_residual]])


def cmd_dilate(args) -> tuple[dict, tuple[list[str], list[list]]]:
    m = serialize.map_from_json(_load(args.input))
    dilation = stinespring_dilate(m, args.tol)
    out = serialize.dilation_to_json(dilation)
    return out, (["d_s", "d_e", "steps"], [[dilation.d_s, dilation.d_e, dilation.steps]])


def cmd_channel(args) -> tuple[dict, tuple[list[str], list[list]]]:
    params = {}
    if args.p is not None:
        params["p"] = args.p
    if args.gamma is not None:
        params["gamma"] = args.gamma
    if args.d is not None:
        params["d"] = args.d
    if args.unitary is not None:
        params["u"] = serialize.matrix_from_json(_load(args.unitary))
    if args.kind == "random":
        rng = np.random.default_rng(args.seed)
        m = random_cptp_map(args.d or 2, rng, kraus_count=args.kraus)
    else:
        m = standard_channel(args.kind, **params)
    return serialize.map_to_json(m), (["kind", "d_in", "d_out"], [[args.kind, m.d_in, m.d_out]])


def cmd_superchannel(args) -> tuple[dict, tuple[list[str], list[list]]]:
    dilation = serialize.dilation_from_json(_load(args.input))
    if dilation.steps != 1:
        raise ValueError("superchannel needs a one-step dilation; use process-tensor for k > 1")
    pt = build_process_tensor(dilation)
    w, _ = linalg.herm_eig(pt.choi)
    out = serialize.process_tensor_to_json(pt)
    out["meta"] = {"min_eig": float(w[-1])}
    return out, (["k", "d_s", "min_eig"], [[1, pt.d_s, float(w[-1])]])


def cmd_process_tensor(args) -> tuple[dict, tuple[list[str], list[list]]]:
    dilation = _truncated(serialize.dilation_from_json(_load(args.input)), args.k)
    pt = build_process_tensor(dilation)
    return serialize.process_tensor_to_json(pt), (
        ["k", "d_s", "choi_trace"],
        [[pt.k, pt.d_s, float(np.trace(pt.choi).real)]],
    )


def cmd_tomography(args) -> tuple[dict, tuple[list[str], list[list]]]:
    dilation = _truncated(serialize.dilation_from_json(_load(args.input)), args.k)
    pt = reconstruct_process_tensor(dilation)
    direct = build_process_tensor(dilation)
    residual = linalg.frobenius(pt.choi - direct.choi)
    out = serialize.process_tensor_to_json(pt)
    out["meta"] = {"sequences": (dilation.d_s ** 4) ** dilation.steps, "residual_vs_direct": residual}
    return out, (["k", "d_s", "sequences", "residual_vs_direct"],
                 [[pt.k, pt.d_s, (dilation.d_s ** 4) ** dilation.steps, residual]])


def cmd_nonmarkov(args) -> tuple[dict, tuple[list[str], list[list]]]:
    dilation = serialize.dilation_from_json(_load(args.input))
    k_max = args.k if args.k is not None else dilation.steps
    if not 1 <= k_max <= dilation.steps:
        raise ValueError(f"-k must lie in 1..{dilation.steps} for this dilation")
    distances = ["trace", "relative_entropy"] if args.distance == "both" else [args.distance]
    results = []
    for k in range(1, k_max + 1):
        pt = build_process_tensor(_truncated(dilation, k))
        markov = is_markov(pt, args.tol)
        for distance in distances:
            n = non_markovianity(pt, distance)
            results.append(
                {
                    "k": k,
                    "distance": distance,
                    "N": n,
                    "surprise_n10": surprise(10, n) if np.isfinite(n) else 0.0,
                    "is_markov": markov,
                }
            )
    report = {
        "d_s": dilation.d_s,
        "steps": dilation.steps,
        "tolerance": args.tol,
        "normalization": "choi states divided by their total trace before the distance",
        "results": results,
    }
    header = ["k", "distance", "N", "surprise_n10", "is_markov"]
    rows = [[r[h] for h in header] for r in results]
    return report, (header, rows)


def cmd_ncp_demo(args) -> tuple[dict, tuple[list[str], list[list]]]:
    report = ncp_demo(args.mu, args.nu, args.preparation)
    verdicts = report["verdicts"]
    header = [
        "mu",
        "nu",
        "preparation",
        "map_cp",
        "map_min_choi_eig",
        "predicted_pi_minus_min_eig",
        "superchannel_min_eig",
    ]
    rows = [[
        args.mu,
        args.nu,
        args.preparation,
        verdicts["cp"],
        verdicts["min_choi_eig"],
        report["predicted_pi_minus_min_eig"],
        verdicts["superchannel_min_eig"],
    ]]
    return report, (header, rows)


# ------------------------------------------------------------- plumbing

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=1e-9, help="verdict tolerance")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized constructions")
    parser.add_argument("--output", "-o", help="write the JSON report here (default stdout)")
    parser.add_argument("--emit-table", metavar="CSV", help="also write a plot-ready CSV table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmaps",
        description="Quantum maps, superchannels and process tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="re-express a map in another representation")
    p.add_argument("input")
    p.add_argument("--to", required=True, choices=REPRESENTATION_NAMES)
    _add_common(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("check", help="trace/Hermiticity/complete-positivity verdicts")
    p.add_argument("input")
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("dilate", help="Stinespring dilation of a CPTP map")
    p.add_argument("input")
    _add_common(p)
    p.set_defaults(func=cmd_dilate)

    p = sub.add_parser("channel", help="construct a standard channel")
    p.add_argument("--kind", required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--kraus", type=int, help="Kraus count for --kind random")
    p.add_argument("--unitary", help="matrix JSON file for --kind unitary")
    _add_common(p)
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("superchannel", help="one-step process tensor of a dilation")
    p.add_argument("input")
    _add_common(p)
    p.set_defaults(func=cmd_superchannel)

    p = sub.add_parser("process-tensor", help="k-step process tensor of a dilation")
    p.add_argument("input")
    p.add_argument("-k", type=int, help="use only the first k steps")
    _add_common(p)
    p.set_defaults(func=cmd_process_tensor)

    p = sub.add_parser("tomography", help="reconstruct the process tensor from basis sequences")
    p.add_argument("input")
    p.add_argument("-k", type=int, help="use only the first k steps")
    _add_common(p)
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("nonmarkov", help="non-Markovianity of a dilated process")
    p.add_argument("input")
    p.add_argument("-k", type=int, help="sweep up to this many steps")
    p.add_argument(
        "--distance", choices=["trace", "relative_entropy", "both"], default="both"
    )
    _add_common(p)
    p.set_defaults(func=cmd_nonmarkov)

    p = sub.add_parser("ncp-demo", help="correlated-preparation tomography demonstration")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--preparation", choices=["projective", "rotate"], default="projective")
    _add_common(p)
    p.set_defaults(func=cmd_ncp_demo)

    return parser


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    serialize.write_atomic(path, buffer.getvalue())


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, table = args.func(args)
        text = serialize.dumps_canonical(report)
        if args.output:
            serialize.write_atomic(args.output, text)
        else:
            sys.stdout.write(text)
        if args.emit_table:
            _write_csv(args.emit_table, *table)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
