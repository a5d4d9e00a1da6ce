"""Command-line entry point: ``covdex <subcommand> ...``.

Exit codes: 0 success (or Verified), 1 malformed input, 2 Unknown / budget
exhausted / nothing found, 3 Refuted.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import bounds as B
from . import gamma as G
from . import index as I
from . import tables
from .bodies import Body, BodyError, DirectSum, MinkowskiSum, as_body, body_from_dict, body_key
from .calculus import coin_direct_sum, minkowski_upper
from .config import RunConfig
from .cover import CoverCertificate, Status, verify_cover
from .search import feasible_cover_search

EXIT_OK, EXIT_MALFORMED, EXIT_UNKNOWN, EXIT_REFUTED = 0, 1, 2, 3


class InputError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, ensure_ascii=False, indent=2)


def _text(obj, indent: int = 0) -> str:
    """Aligned ``key  value`` rendering of a flat or nested report."""
    pad = " " * indent
    if not isinstance(obj, dict):
        return pad + str(obj)
    width = max((len(str(k)) for k in obj), default=0)
    lines = []
    for k in sorted(obj):
        v = obj[k]
        if isinstance(v, dict):
            lines.append(f"{pad}{k}")
            lines.append(_text(v, indent + 2))
        else:
            lines.append(f"{pad}{str(k).ljust(width)}  {json.dumps(_jsonable(v), ensure_ascii=False)}")
    return "\n".join(lines)


def emit(obj, config: RunConfig, out=None) -> None:
    out = out or sys.stdout
    out.write((dumps(obj) if config.output == "json" else _text(obj)) + "\n")


def load_body(arg: str) -> Body:
    """``@name`` for a canonical body, inline JSON, or a path to a JSON file."""
    try:
        if arg.startswith("@"):
            return as_body(arg)
        if arg.lstrip().startswith("{"):
            return body_from_dict(json.loads(arg))
        return body_from_dict(json.loads(Path(arg).read_text()))
    except FileNotFoundError:
        raise InputError(f"body file not found: {arg}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"body is not valid JSON: {exc}") from None
    except BodyError as exc:
        raise InputError(str(exc)) from None


def _config(ns) -> RunConfig:
    flags = {k: getattr(ns, k, None) for k in ("seed", "tol", "slack", "starts", "m_cap", "cell_budget", "output")}
    try:
        return RunConfig.resolve(flags)
    except ValueError as exc:
        raise InputError(f"invalid configuration: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_index(ns, config: RunConfig, kind: str) -> int:
    body = load_body(ns.body)
    fn = I.coin if kind == "coin" else I.wcoin
    r = fn(body, config=config, prune=not ns.no_prune, search_enabled=not ns.no_search)
    report = r.to_dict()
    report["body"] = body_key(body)
    emit(report, config)
    v = r.value
    determinate = math.isfinite(v.hi) and v.width <= 2 * config.tol * v.hi
    return EXIT_OK if determinate else EXIT_UNKNOWN


def cmd_gamma(ns, config: RunConfig) -> int:
    body = load_body(ns.body)
    if ns.m < 1:
        raise InputError("m must be at least 1")
    value = G.gamma_estimate(body, ns.m, config=config, search_enabled=not ns.no_search)
    citation = "" if isinstance(body, (DirectSum, MinkowskiSum)) else G.gamma_bounds(body, ns.m)[1]
    report = {"body": body_key(body), "m": ns.m, **value.to_dict(), "citation": citation}
    emit(report, config)
    return EXIT_OK


def cmd_nlambda(ns, config: RunConfig) -> int:
    body = load_body(ns.body)
    if not 0 < ns.lam < 1:
        raise InputError("lambda must lie in (0, 1)")
    if isinstance(body, DirectSum):
        from .calculus import direct_sum_n_lambda

        value = direct_sum_n_lambda(body.flat_parts(), ns.lam, config)
    else:
        value = G.n_lambda(body, ns.lam, config=config, search_enabled=not ns.no_search)
    emit({"body": body_key(body), "lambda": ns.lam, **value.to_dict()}, config)
    return EXIT_OK


def cmd_verify(ns, config: RunConfig) -> int:
    try:
        cert = CoverCertificate.load(ns.cert)
    except FileNotFoundError:
        raise InputError(f"certificate file not found: {ns.cert}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"certificate is not valid JSON: {exc}") from None
    except (BodyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed certificate: {exc}") from None
    out = verify_cover(cert, config.slack, config.cell_budget)
    emit({"m": cert.m, "ratio": cert.ratio, "slack": config.slack, **out.to_dict()}, config)
    return {Status.VERIFIED: EXIT_OK, Status.REFUTED: EXIT_REFUTED}.get(out.status, EXIT_UNKNOWN)


def cmd_search(ns, config: RunConfig) -> int:
    body = load_body(ns.body)
    if not 0 < ns.lam < 1 or ns.m < 1:
        raise InputError("need m ≥ 1 and lambda in (0, 1)")
    try:
        cert = feasible_cover_search(body, ns.m, ns.lam, starts=config.starts, seed=config.seed,
                                     slack=config.slack, cell_budget=config.cell_budget)
    except BodyError as exc:
        raise InputError(str(exc)) from None
    if cert is None:
        emit({"body": body_key(body), "m": ns.m, "lambda": ns.lam, "found": False}, config)
        return EXIT_UNKNOWN
    path = cert.save(ns.out) if ns.out else G.archive_certificate(cert)
    emit({"body": body_key(body), "m": ns.m, "lambda": ns.lam, "found": True, "certificate": str(path)}, config)
    return EXIT_OK


def cmd_sum(ns, config: RunConfig) -> int:
    parts = [load_body(p) for p in ns.parts]
    if len(parts) < 2:
        raise InputError("a sum needs at least two parts")
    try:
        if ns.minkowski:
            r = minkowski_upper(parts, config)
        else:
            r = coin_direct_sum(parts, kind=ns.kind, config=config)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    emit({"kind": "minkowski" if ns.minkowski else ns.kind, **r.to_dict()}, config)
    return EXIT_OK


def cmd_table(ns, config: RunConfig) -> int:
    rows = tables.table(ns.which, config)
    if ns.format == "markdown":
        sys.stdout.write(tables.to_markdown(rows, ns.which))
    elif ns.format == "csv":
        sys.stdout.write(tables.to_csv(rows, ns.which))
    elif config.output == "table":
        sys.stdout.write(tables.to_text(rows, ns.which))
    else:
        sys.stdout.write(dumps({"table": ns.which, "rows": [r.to_dict() for r in rows]}) + "\n")
    return EXIT_OK


def cmd_bounds(ns, config: RunConfig) -> int:
    if ns.lam is not None and not 0 < ns.lam < 1:
        raise InputError("lambda must lie in (0, 1)")
    try:
        rep = B.bound_report(ns.d, ns.symmetric, ns.lam)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    emit(rep.to_dict(), config)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration (flags > COVDEX_* environment > defaults)")
    g.add_argument("--seed", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--slack", type=float)
    g.add_argument("--starts", type=int)
    g.add_argument("--m-cap", dest="m_cap", type=int)
    g.add_argument("--cell-budget", dest="cell_budget", type=int)
    g.add_argument("--output", choices=("json", "table"))

    p = argparse.ArgumentParser(prog="covdex", description="Covering index toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    for kind in ("coin", "wcoin"):
        s = sub.add_parser(kind, parents=[common], help=f"{kind}(K) as an interval")
        s.add_argument("--body", required=True, help="@name, inline JSON, or a body JSON file")
        s.add_argument("--no-prune", action="store_true", help="evaluate every m below the first finite value")
        s.add_argument("--no-search", action="store_true", help="curated data and archive only")
        s.set_defaults(func=lambda ns, c, k=kind: cmd_index(ns, c, k))

    s = sub.add_parser("gamma", parents=[common], help="enclosure of γ_m(K)")
    s.add_argument("--body", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--no-search", action="store_true")
    s.set_defaults(func=cmd_gamma)

    s = sub.add_parser("nlambda", parents=[common], help="enclosure of N_λ(K)")
    s.add_argument("--body", required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--no-search", action="store_true")
    s.set_defaults(func=cmd_nlambda)

    s = sub.add_parser("verify", parents=[common], help="verify a cover certificate")
    s.add_argument("--cert", required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", parents=[common], help="search for an m-cover at ratio λ")
    s.add_argument("--body", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--out", help="write the certificate here instead of the archive")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("sum", parents=[common], help="index of a direct or Minkowski sum")
    s.add_argument("parts", nargs="+", help="bodies (@name, inline JSON or files)")
    s.add_argument("--kind", choices=("coin", "wcoin"), default="coin")
    s.add_argument("--minkowski", action="store_true", help="Minkowski sum upper bound instead of a direct sum")
    s.set_defaults(func=cmd_sum)

    s = sub.add_parser("table", parents=[common], help="reproduce the coin (1) or wcoin (2) table")
    s.add_argument("which", type=int, choices=(1, 2))
    s.add_argument("--format", choices=("json", "markdown", "csv"), default=None)
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("bounds", parents=[common], help="closed-form upper bounds in dimension d")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--symmetric", action="store_true")
    s.add_argument("--lambda", dest="lam", type=float)
    s.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    try:
        config = _config(ns)
        return ns.func(ns, config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
