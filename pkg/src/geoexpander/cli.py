"""Command-line entry point: ``geoexpander <subcommand> ...``.

Every subcommand writes a JSON report (``--report``) that embeds a run
manifest; a one-line summary goes to stdout. Exit codes: 0 success,
2 validation error, 3 refused because of a size cap or limit.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bounds import BoundsError, bound_report, certify_overlap
from .complex import (ComplexError, complex_to_dict, dump_complex, induced_bipartite,
                      load_complex)
from .discrepancy import (CapExceeded as DiscCap, DiscrepancyError, discrepancy_exact,
                          discrepancy_local_search, discrepancy_spectral_bound)
from .generators import FlagComplexSpec, complete_partite, flag_complex, random_partite
from .geometry import (GeometryError, load_embedding, overlap_monte_carlo, overlap_search_2d,
                       random_embedding)
from .spectral import CapExceeded as SpecCap, SpectralError, lambda_tilde, walk_decomposition

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3

ANCHORS = {
    "lambda_tilde": "normalized second eigenvalue of the type-induced graph",
    "walk_decomposition": "2n-walk decomposition over distance-2k averaging operators",
    "discrepancy": "partite hypergraph discrepancy",
    "mixing": "hypergraph mixing lemma: Disc(H) <= d max_i lambda_tilde(B_i)",
    "overlap": "geometric overlap: fraction of embedded chambers covering one point",
    "certify": "discrepancy overlap criterion with Pach's constant",
}


class UsageError(Exception):
    pass


def _json_value(x):
    """Report encoding: rationals as exact strings plus a decimal, floats at fixed precision."""
    if isinstance(x, Fraction):
        return {"rational": str(x), "decimal": float(f"{float(x):.15g}")}
    if isinstance(x, float):
        return float(f"{x:.15g}")
    if isinstance(x, dict):
        return {str(k): _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
            else _dt.datetime.now(_dt.timezone.utc))
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(args: argparse.Namespace, argv: list[str]) -> dict:
    inputs = {}
    for attr in ("input", "embedding"):
        path = getattr(args, attr, None)
        if path:
            inputs[path] = _digest(path)
    seeds = {k: getattr(args, k) for k in ("seed",) if getattr(args, k, None) is not None}
    return {"command": args.command, "argv": list(argv), "seeds": seeds,
            "input_digests": inputs, "tool_version": __version__, "timestamp": _timestamp()}


def _write_report(args, argv, body: dict) -> None:
    if not args.report:
        return
    doc = {"manifest": manifest(args, argv), **_json_value(body)}
    Path(args.report).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n",
                                 encoding="utf-8")


def _parse_sizes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be comma separated integers, got {text!r}")


def _need_seed(args, why: str) -> None:
    if args.seed is None:
        raise UsageError(f"--seed is required for {why}")


# -- subcommands ------------------------------------------------------------

def cmd_generate(args, argv):
    if args.kind == "complete":
        if not args.sizes:
            raise UsageError("--sizes is required for --kind complete")
        cx, extra = complete_partite(_parse_sizes(args.sizes)), {}
    elif args.kind == "flag":
        if args.q is None or args.d is None:
            raise UsageError("--q and --d are required for --kind flag")
        cx, extra = flag_complex(FlagComplexSpec(args.q, args.d)), {}
    else:
        if not args.sizes or args.p is None:
            raise UsageError("--sizes and --p are required for --kind random")
        _need_seed(args, "--kind random")
        cx, pruned = random_partite(_parse_sizes(args.sizes), Fraction(args.p), args.seed)
        extra = {"pruned_vertices": pruned}
        if not cx.chambers:
            raise ComplexError("no chambers: every transversal was rejected")
    if args.out:
        dump_complex(cx, args.out)
    summary = {"d": cx.d, "vertices": len(cx.vertices), "chambers": cx.num_chambers,
               "class_sizes": [len(c) for c in cx.classes], **extra}
    _write_report(args, argv, {"generate": summary})
    print(f"generated {args.kind} complex: d={cx.d}, {len(cx.vertices)} vertices, "
          f"{cx.num_chambers} chambers" + (f" -> {args.out}" if args.out else ""))
    if not args.out and not args.report:
        print(json.dumps(complex_to_dict(cx)))


def cmd_spectral(args, argv):
    cx = load_complex(args.input)
    if args.mode == "iter":
        _need_seed(args, "--mode iter")
    types = [args.type] if args.type is not None else list(range(cx.d + 1))
    out = []
    for i in types:
        cx.check_type(i)
        g = induced_bipartite(cx, i)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            lam = lambda_tilde(g, mode=args.mode, seed=args.seed or 0, tol=args.tol)
        entry = {"type": i, "left": len(g.left), "right": len(g.right),
                 "lambda_tilde": lam, "anchor": ANCHORS["lambda_tilde"],
                 "warnings": [str(w.message) for w in caught]}
        if args.n:
            wd = walk_decomposition(g, args.n)
            entry["walk_decomposition"] = {
                "n": args.n, "uniform": wd.uniform, "identity_holds": wd.identity_holds,
                "mismatched_entries": len(wd.mismatches),
                "alpha": [str(a) for a in wd.alpha[0]] if wd.uniform
                else {str(g.left[u]): [str(a) for a in row] for u, row in enumerate(wd.alpha)},
                "anchor": ANCHORS["walk_decomposition"]}
        out.append(entry)
        print(f"type {i}: lambda_tilde = {lam:.12g}")
    _write_report(args, argv, {"spectral": out, "mode": args.mode})


def cmd_disc(args, argv):
    cx = load_complex(args.input)
    if args.method == "exact":
        res = discrepancy_exact(cx)
        body = {"value": res.value, "witness": res.witness.to_json(), "method": "exact"}
        shown = f"{res.value} ({float(res.value):.12g})"
    elif args.method == "local":
        _need_seed(args, "--method local")
        res = discrepancy_local_search(cx, args.restarts, args.seed, threads=args.threads)
        body = {"value": res.value, "witness": res.witness.to_json(), "method": "local-search",
                "restarts": args.restarts, "lower_bound": True}
        shown = f">= {res.value} ({float(res.value):.12g})"
    else:
        sb = discrepancy_spectral_bound(cx)
        value = Fraction(0) if sb.value == 0 else sb.value
        body = {"value": value, "per_type_lambda_tilde": list(sb.per_type),
                "method": "spectral-bound", "upper_bound": True}
        shown = f"<= {float(value):.12g} (d * max lambda_tilde)"
        body["anchor_mixing"] = ANCHORS["mixing"]
    body["anchor"] = ANCHORS["discrepancy"]
    _write_report(args, argv, {"disc": body})
    print(f"Disc(H) {shown}")


def cmd_overlap(args, argv):
    cx = load_complex(args.input)
    if args.embedding:
        emb = load_embedding(args.embedding, exact=not args.float)
    elif args.random_embedding is not None:
        emb = random_embedding(cx, args.random_embedding)
    else:
        raise UsageError("give --embedding FILE or --random-embedding SEED")
    if args.mode == "search2d":
        res = overlap_search_2d(cx, emb)
    else:
        _need_seed(args, "--mode mc")
        res = overlap_monte_carlo(cx, emb, args.samples, args.seed)
    body = {"point": [str(x) for x in res.point], "covered": res.count, "fraction": res.fraction,
            "witnesses": list(res.witnesses), "degenerate_chambers": list(res.degenerate),
            "mode": args.mode, "anchor": ANCHORS["overlap"]}
    _write_report(args, argv, {"overlap": body})
    print(f"best point covered by {res.count}/{cx.num_chambers} chambers "
          f"(fraction {float(res.fraction):.6g})")


def cmd_bounds(args, argv):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = bound_report(args.d, args.q, args.n, Fraction(args.cd), args.coxeter)
    _write_report(args, argv, {"bounds": rep.to_json()})
    print(rep.verdict)
    for e in rep.entries:
        if not e.name.startswith(("hecke_bound", "walk_bound")):
            print(f"  {e.name} = {e.value}")


def cmd_certify(args, argv):
    cx = load_complex(args.input)
    cert = certify_overlap(cx, Fraction(args.cd))
    body = {"certified": cert.certified, "epsilon": cert.epsilon, "disc_bound": cert.disc_bound,
            "per_type_lambda_tilde": list(cert.per_type), "c_d": cert.c_d, "gap": cert.gap,
            "verdict": cert.verdict, "anchor": ANCHORS["certify"]}
    _write_report(args, argv, {"certify": body})
    print(cert.verdict)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", help="write the JSON report here")
    common.add_argument("--threads", type=int, default=1)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True,
                      help="exact rational coordinates (default)")
    mode.add_argument("--float", action="store_true", help="floating-point coordinates")

    p = argparse.ArgumentParser(prog="geoexpander", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="build a test complex")
    g.add_argument("--kind", choices=["complete", "flag", "random"], required=True)
    g.add_argument("--sizes")
    g.add_argument("--q", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--p")
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("spectral", parents=[common], help="lambda_tilde and walk decomposition")
    s.add_argument("--input", required=True)
    s.add_argument("--type", type=int)
    s.add_argument("--mode", choices=["dense", "iter"], default="dense")
    s.add_argument("--n", type=int, default=0, help="walk half-length (0 = skip)")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_spectral)

    d = sub.add_parser("disc", parents=[common], help="discrepancy of the partite hypergraph")
    d.add_argument("--input", required=True)
    d.add_argument("--method", choices=["exact", "local", "spectral"], default="exact")
    d.add_argument("--restarts", type=int, default=20)
    d.add_argument("--seed", type=int)
    d.set_defaults(func=cmd_disc)

    o = sub.add_parser("overlap", parents=[common], help="best covered point of an embedding")
    o.add_argument("--input", required=True)
    o.add_argument("--embedding")
    o.add_argument("--random-embedding", type=int, metavar="SEED")
    o.add_argument("--mode", choices=["search2d", "mc"], default="search2d")
    o.add_argument("--samples", type=int, default=10000)
    o.add_argument("--seed", type=int)
    o.set_defaults(func=cmd_overlap)

    b = sub.add_parser("bounds", parents=[common], help="evaluate the constant chain")
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--q", type=int, required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--cd", required=True, help="Pach constant, e.g. 1/2")
    b.add_argument("--coxeter", choices=["crystallographic", "all-finite"],
                   default="crystallographic")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("certify", parents=[common], help="certify overlap from measured spectra")
    c.add_argument("--input", required=True)
    c.add_argument("--cd", required=True)
    c.set_defaults(func=cmd_certify)
    return p


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, argv)
    except (DiscCap, SpecCap, OverflowError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, ComplexError, DiscrepancyError, SpectralError, GeometryError,
            BoundsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    sys.exit(run())
