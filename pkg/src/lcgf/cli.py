"""Command-line interface: a thin client over the HTTP service.

Commands run against an in-process application instance by default, or
against a running server with --server.  Exit codes: 0 success, 2 parse or
domain errors, 3 an audit that ends inconsistent.
"""

import argparse
import os
import sys

import httpx

from .report import Options, align, records_pretty, records_table, \
    render_machine, render_text

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INCONSISTENT = 3

_ENDPOINTS = {
    "lc-eval": "/v1/lc/eval",
    "gf-pair": "/v1/gf/pair",
    "gf-check": "/v1/gf/check",
    "laplace": "/v1/laplace/transform",
    "solve-ivp": "/v1/ivp/solve",
    "audit": "/v1/ivp/audit",
    "mollifier-dump": "/v1/mollifier/dump",
}


def _add_common(p: argparse.ArgumentParser, ruleset_default: str = "hat"):
    p.add_argument("--trunc", default="6", metavar="Q",
                   help="largest retained exponent, a rational (default 6)")
    p.add_argument("--moment-order", type=int, default=2, metavar="N",
                   help="vanishing-moment order of the mollifier (default 2)")
    p.add_argument("--quad-tol", type=float, default=1e-12, metavar="TOL",
                   help="quadrature tolerance (default 1e-12)")
    p.add_argument("--battery", type=int, default=32, metavar="K",
                   help="test-function battery size (default 32)")
    p.add_argument("--seed", type=int, default=None, metavar="S",
                   help="battery seed (default: LCGF_SEED or 0)")
    p.add_argument("--format", choices=("text", "machine"), default="text",
                   help="output format (default text)")
    p.add_argument("--ruleset", choices=("naive", "engineer", "hat"),
                   default=ruleset_default,
                   help=f"transform ruleset (default {ruleset_default})")
    p.add_argument("--server", default=None, metavar="URL",
                   help="base URL of a running service "
                        "(default: in-process)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lcgf",
        description="Levi-Civita scalars, generalized functions, and a "
                    "contradiction-free Laplace transform.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lc-eval", help="evaluate a scalar expression")
    p.add_argument("expression")
    _add_common(p)

    p = sub.add_parser("gf-pair",
                       help="pair an expression against a test battery")
    p.add_argument("expression")
    _add_common(p)

    p = sub.add_parser("gf-check",
                       help="check a relation: '~=' weak, '=' exact, "
                            "'~' associated")
    p.add_argument("relation")
    _add_common(p)

    p = sub.add_parser("laplace", help="transform of an expression")
    p.add_argument("expression")
    _add_common(p)

    p = sub.add_parser("solve-ivp", help="solve an initial value problem")
    p.add_argument("equation")
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--yp0", type=float, default=0.0)
    _add_common(p)

    p = sub.add_parser("audit",
                       help="solve under a chosen ruleset and audit the "
                            "result against its own initial data")
    p.add_argument("equation")
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--yp0", type=float, default=0.0)
    p.add_argument("--eps", type=float, action="append", default=None,
                   metavar="E",
                   help="impulse offsets for the engineer ruleset "
                        "(repeatable; default 0.1 0.01)")
    _add_common(p, ruleset_default="naive")

    p = sub.add_parser("mollifier-dump",
                       help="tabulate the mollifier profile")
    p.add_argument("--nodes", type=int, default=1001)
    _add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return ap


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("LCGF_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"lcgf: LCGF_SEED must be an integer, "
                             f"got {env!r}")
    return 0


def _request_body(args) -> dict:
    options = {
        "trunc": args.trunc,
        "moment_order": args.moment_order,
        "quad_tol": args.quad_tol,
        "battery": args.battery,
        "seed": _resolve_seed(args),
        "ruleset": args.ruleset,
    }
    cmd = args.command
    if cmd in ("lc-eval", "gf-pair", "laplace"):
        return {"expression": args.expression, "options": options}
    if cmd == "gf-check":
        return {"relation": args.relation, "options": options}
    if cmd == "solve-ivp":
        return {"equation": args.equation, "y0": args.y0, "yp0": args.yp0,
                "options": options}
    if cmd == "audit":
        body = {"equation": args.equation, "y0": args.y0, "yp0": args.yp0,
                "options": options}
        if args.eps:
            body["epsilons"] = args.eps
        return body
    return {"nodes": args.nodes, "options": options}


def _client(args) -> httpx.Client:
    if args.server:
        return httpx.Client(base_url=args.server, timeout=60.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import create_app
    return TestClient(create_app(), raise_server_exceptions=False)


# ---------------------------------------------------------------------------
# text rendering per command
# ---------------------------------------------------------------------------


def _body_lc_eval(result: dict) -> list:
    v = result["value"]
    lines = align([["value", v["pretty"]], ["class", v["classification"]]])
    lines.append("  series")
    lines.extend(records_table(v["records"]))
    return lines


def _body_gf_pair(result: dict) -> list:
    lines = align([
        ["expression", result["expression"]],
        ["centers", ", ".join(repr(c) for c in result["centers"])],
        ["battery", str(result["count"])],
    ])
    lines.append("  pairings")
    rows = [["idx", "support", "value"]]
    for row in result["pairings"]:
        lo, hi = row["support"]
        rows.append([str(row["index"]), f"[{lo:.3f}, {hi:.3f}]",
                     row["value"]["pretty"]])
    lines.extend(align(rows, indent="    "))
    return lines


def _body_gf_check(result: dict) -> list:
    return align([
        ["operator", result["operator"]],
        ["method", result["method"]],
        ["verdict", result["verdict"]],
    ])


def _body_laplace(result: dict) -> list:
    region = result["image"]["region"]
    return align([
        ["image", result["pretty"]],
        ["region", f"Re z > {region:g}"],
        ["terms", str(len(result["image"]["terms"]))],
    ])


def _body_solve_ivp(result: dict) -> list:
    lines = align([["y(t)", "= " + result["solution"]]])
    lines.append("  trace")
    lines.extend("    " + t for t in result["trace"])
    lines.append("  initial values")
    rows = []
    for c in result["initial_checks"]:
        rows.append([c["name"],
                     "expected " + records_pretty(c["expected"]),
                     "obtained " + records_pretty(c["obtained"]),
                     "exact" if c["exact"]
                     else f"off by {c['discrepancy']:g}"])
    lines.extend(align(rows, indent="    "))
    lines.extend(align([
        ["ode check", result["ode_verdict"]],
        ["verification", "PASS" if result["verified"] else "FAIL"],
    ]))
    return lines


def _body_audit(result: dict) -> list:
    lines = align([["ruleset", result["ruleset"]]])
    lines.append("  trace")
    lines.extend("    " + t for t in result["trace"])
    lines.extend(align([["solution", "y(t) = " + result["solution"]]]))
    if result["violations"]:
        lines.append("  violations")
        for v in result["violations"]:
            lines.append(
                f"    {v['condition']}: expected "
                f"{records_pretty(v['expected'])}, obtained "
                f"{records_pretty(v['obtained'])} "
                f"(discrepancy {v['discrepancy']:g})")
    lines.extend(align([["verdict", result["verdict"]]]))
    return lines


def _body_mollifier_dump(result: dict) -> list:
    lines = align([
        ["moment-order", str(result["moment_order"])],
        ["support", "[-1, 1]"],
        ["condition", f"{result['condition_number']:.6e}"],
        ["nodes", str(result["count"])],
    ])
    rows = [["x", "phi(x)"]]
    for x, phi in result["nodes"]:
        rows.append([repr(x), repr(phi)])
    lines.extend(align(rows, indent="    "))
    return lines


_BODIES = {
    "lc-eval": _body_lc_eval,
    "gf-pair": _body_gf_pair,
    "gf-check": _body_gf_check,
    "laplace": _body_laplace,
    "solve-ivp": _body_solve_ivp,
    "audit": _body_audit,
    "mollifier-dump": _body_mollifier_dump,
}

_INPUT_KEYS = ("expression", "relation", "equation", "y0", "yp0", "nodes")


def _inputs_of(body: dict) -> dict:
    return {k: body[k] for k in _INPUT_KEYS if k in body}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import create_app
        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_OK

    body = _request_body(args)
    try:
        with _client(args) as client:
            resp = client.post(_ENDPOINTS[args.command], json=body)
    except httpx.HTTPError as exc:
        print(f"lcgf: cannot reach the service: {exc}", file=sys.stderr)
        return 1

    payload = resp.json()
    if resp.status_code != 200:
        err = payload.get("error", {})
        msg = err.get("message") or payload.get("detail") or "request failed"
        kind = err.get("type", "error")
        print(f"lcgf: {kind} error: {msg}", file=sys.stderr)
        return EXIT_INPUT

    if args.format == "machine":
        sys.stdout.write(render_machine(payload))
    else:
        opts = Options(**payload["options"])
        result = payload["result"]
        text = render_text(payload["command"], _inputs_of(body), opts,
                           _BODIES[args.command](result))
        sys.stdout.write(text)

    if args.command == "audit" and \
            payload["result"].get("verdict") == "inconsistent":
        return EXIT_INCONSISTENT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
