"""FastAPI application: JSON endpoints over the algebra and the transform.

Every successful response is a Report (schema_version, command, options,
result).  Input and domain failures map to 422 with a typed error body;
an inconsistent audit is a successful computation, not an HTTP error.
"""

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..dsl import (
    Bin,
    Call,
    Num,
    Sym,
    as_genfunction,
    eval_scalar,
    eval_time_expression,
    parse_expression,
    parse_ivp,
    parse_relation,
    reject_scale_symbol,
    _affine_in_t,
    _exponent_fraction,
)
from ..errors import DomainError, LcgfError, ParseError
from ..genfunc import FALSE, TRUE, associated, normalize, weak_equal
from ..laplace import (
    AuditProblem,
    IVPSpec,
    audit_classical,
    from_genfunction,
    solve_ivp,
    transform,
)
from ..levicivita import DEFAULT_CONTEXT, lc_to_records
from ..mollify import get_mollifier
from ..report import Options, build_algebra, lc_payload, machine_payload
from ..testfunc import battery
from .models import (
    AuditRequest,
    ExpressionRequest,
    Health,
    IvpRequest,
    MollifierDumpRequest,
    RelationRequest,
    Report,
)


def _options(m) -> Options:
    return Options(trunc=m.trunc, moment_order=m.moment_order,
                   quad_tol=m.quad_tol, battery=m.battery, seed=m.seed,
                   ruleset=m.ruleset).validate()


# ---------------------------------------------------------------------------
# handlers (plain functions so the CLI test client and unit tests share them)
# ---------------------------------------------------------------------------


def handle_lc_eval(expression: str, opts: Options) -> dict:
    alg = build_algebra(opts)
    ast = parse_expression(expression)
    value = eval_scalar(ast, alg.ctx)
    return {
        "expression": expression,
        "value": lc_payload(value),
    }


def handle_gf_pair(expression: str, opts: Options) -> dict:
    alg = build_algebra(opts)
    g = as_genfunction(eval_time_expression(parse_expression(expression), alg),
                       alg)
    centers = sorted({t.center for t in normalize(g) if t.center is not None}
                     | {0.0})
    taus = battery(seed=opts.seed, count=opts.battery,
                   centers=tuple(centers))
    rows = []
    for i, tau in enumerate(taus):
        val = g.pairing(tau)
        lo, hi = tau.support
        rows.append({"index": i, "support": [lo, hi],
                     "value": lc_payload(val)})
    return {
        "expression": expression,
        "centers": centers,
        "count": len(rows),
        "pairings": rows,
    }


def handle_gf_check(relation: str, opts: Options) -> dict:
    alg = build_algebra(opts)
    lhs_ast, op, rhs_ast = parse_relation(relation)
    if op is None:
        raise ParseError("a check needs a relation: '~=' (weak), "
                         "'=' (exact), or '~' (associated)")
    f = as_genfunction(eval_time_expression(lhs_ast, alg), alg)
    g = as_genfunction(eval_time_expression(rhs_ast, alg), alg)
    if op == "=":
        verdict = TRUE if not normalize(f - g) else FALSE
        method = "normal-form"
    elif op == "~=":
        verdict = weak_equal(f, g, seed=opts.seed, battery_count=opts.battery)
        method = "weak-battery"
    else:
        verdict = TRUE if associated(f, g, seed=opts.seed,
                                     battery_count=opts.battery) else FALSE
        method = "association-battery"
    return {
        "relation": relation,
        "operator": op,
        "method": method,
        "verdict": verdict.name,
    }


def handle_laplace(expression: str, opts: Options) -> dict:
    alg = build_algebra(opts)
    g = as_genfunction(eval_time_expression(parse_expression(expression), alg),
                       alg)
    element = from_genfunction(g)
    image = transform(element)
    return {
        "expression": expression,
        "pretty": image.pretty(),
        "image": image.to_payload(),
    }


def handle_solve_ivp(equation: str, y0: float, yp0: float,
                     opts: Options) -> dict:
    alg = build_algebra(opts)
    eq = parse_ivp(equation)
    rhs_gf = as_genfunction(eval_time_expression(eq.rhs_ast, alg), alg)
    spec = IVPSpec(eq.a2, eq.a1, eq.a0, from_genfunction(rhs_gf),
                   y0, yp0, mode=eq.mode)
    res = solve_ivp(spec, alg)
    return {
        "equation": equation,
        "y0": y0,
        "yp0": yp0,
        "solution": res.pretty_solution(),
        "image": res.image.to_payload(),
        "trace": list(res.trace),
        "initial_checks": [{
            "name": c.name,
            "expected": lc_to_records(c.expected),
            "obtained": lc_to_records(c.obtained),
            "exact": c.exact,
            "discrepancy": c.discrepancy,
        } for c in res.initial_checks],
        "ode_verdict": res.ode_verdict.name,
        "verified": res.verified,
    }


def _table_kind(ast, what: str) -> tuple:
    """Map a classical right-hand side to its table id."""
    def _std_affine(node):
        a, b = _affine_in_t(node, DEFAULT_CONTEXT)
        if not b.is_real:
            raise DomainError(f"{what}: locations must be real")
        br = b.re.standard_part()
        if not (b.re - br).is_zero:
            raise DomainError(f"{what}: locations must be standard reals")
        return a, br

    if isinstance(ast, Call) and ast.fn in ("delta", "delta_n"):
        if ast.fn == "delta_n":
            kf = _exponent_fraction(ast.args[0])
            if kf.denominator != 1 or kf < 0:
                raise ParseError("delta_n order must be a nonnegative integer")
            order, arg = int(kf), ast.args[1]
        else:
            order, arg = 0, ast.args[0]
        a, br = _std_affine(arg)
        if a != 1.0:
            raise DomainError(f"{what}: impulses must look like delta(t - c)")
        eps = -br
        if eps < 0:
            raise DomainError(f"{what}: impulse locations must be >= 0")
        return ("delta", order, eps)
    if isinstance(ast, Call) and ast.fn in ("sin", "cos"):
        a, br = _std_affine(ast.args[0])
        if br != 0.0 or a == 0.0:
            raise DomainError(f"{what}: trig entries must look like "
                              f"{ast.fn}(w*t)")
        return (ast.fn, a)
    if isinstance(ast, Call) and ast.fn == "exp":
        a, br = _std_affine(ast.args[0])
        if br != 0.0:
            raise DomainError(f"{what}: exponentials must look like exp(a*t)")
        return ("exp", a)
    if isinstance(ast, Sym) and ast.name == "t":
        return ("poly", 1)
    if isinstance(ast, Bin) and ast.op == "^" and \
            isinstance(ast.lhs, Sym) and ast.lhs.name == "t":
        kf = _exponent_fraction(ast.rhs)
        if kf.denominator != 1 or kf < 0:
            raise DomainError(f"{what}: powers of t take integer exponents")
        return ("poly", int(kf))
    if isinstance(ast, Num) and ast.value == 1.0:
        return ("poly", 0)
    raise DomainError(f"{what}: the right-hand side must be a single table "
                      f"entry (delta, delta_n, sin, cos, exp, or t^k)")


def handle_audit(equation: str, y0: float, yp0: float, epsilons,
                 opts: Options) -> dict:
    alg = build_algebra(opts)
    eq = parse_ivp(equation)
    if opts.ruleset == "hat":
        rhs_gf = as_genfunction(eval_time_expression(eq.rhs_ast, alg), alg)
        spec = IVPSpec(eq.a2, eq.a1, eq.a0, from_genfunction(rhs_gf),
                       y0, yp0, mode=eq.mode)
        res = solve_ivp(spec, alg)
        violations = [{
            "condition": c.name,
            "expected": lc_to_records(c.expected),
            "obtained": lc_to_records(c.obtained),
            "discrepancy": c.discrepancy,
        } for c in res.initial_checks
            if not (c.exact or c.discrepancy <= 1e-10)]
        consistent = res.verified and not violations
        payload = {
            "ruleset": "hat",
            "trace": list(res.trace),
            "image": res.image.to_payload(),
            "solution": res.pretty_solution(),
            "violations": violations,
            "verdict": "consistent" if consistent else "inconsistent",
        }
    else:
        # classical-only context: the scale symbol cannot appear here
        reject_scale_symbol(eq.rhs_ast, f"{opts.ruleset} audit")
        kind = _table_kind(eq.rhs_ast, f"{opts.ruleset} audit")
        prob = AuditProblem(eq.a2, eq.a1, eq.a0, kind, y0, yp0)
        rep = audit_classical(prob, ruleset=opts.ruleset,
                              epsilons=tuple(epsilons), ctx=alg.ctx)
        payload = rep.to_payload()
    payload.update({"equation": equation, "y0": y0, "yp0": yp0})
    return payload


def handle_mollifier_dump(nodes: int, opts: Options) -> dict:
    opts.validate()
    m = get_mollifier(opts.moment_order)
    xs = np.linspace(-1.0, 1.0, nodes)
    return {
        "moment_order": opts.moment_order,
        "support": [-1.0, 1.0],
        "count": nodes,
        "condition_number": m.condition_number,
        "nodes": [[float(x), m.bump.value(float(x))] for x in xs],
    }


# ---------------------------------------------------------------------------
# app wiring
# ---------------------------------------------------------------------------


def create_app() -> FastAPI:
    app = FastAPI(title="lcgf", version=__version__)

    @app.exception_handler(LcgfError)
    async def _lcgf_error(request: Request, exc: LcgfError):
        kind = "parse" if isinstance(exc, ParseError) else \
            "domain" if isinstance(exc, DomainError) else "unsupported"
        return JSONResponse(status_code=422, content={
            "schema_version": "1",
            "error": {"type": kind, "message": str(exc)},
        })

    @app.get("/v1/health", response_model=Health)
    async def health():
        return Health(version=__version__)

    @app.post("/v1/lc/eval", response_model=Report)
    async def lc_eval(req: ExpressionRequest):
        opts = _options(req.options)
        return machine_payload("lc-eval", opts,
                               handle_lc_eval(req.expression, opts))

    @app.post("/v1/gf/pair", response_model=Report)
    async def gf_pair(req: ExpressionRequest):
        opts = _options(req.options)
        return machine_payload("gf-pair", opts,
                               handle_gf_pair(req.expression, opts))

    @app.post("/v1/gf/check", response_model=Report)
    async def gf_check(req: RelationRequest):
        opts = _options(req.options)
        return machine_payload("gf-check", opts,
                               handle_gf_check(req.relation, opts))

    @app.post("/v1/laplace/transform", response_model=Report)
    async def laplace(req: ExpressionRequest):
        opts = _options(req.options)
        return machine_payload("laplace", opts,
                               handle_laplace(req.expression, opts))

    @app.post("/v1/ivp/solve", response_model=Report)
    async def ivp_solve(req: IvpRequest):
        opts = _options(req.options)
        return machine_payload(
            "solve-ivp", opts,
            handle_solve_ivp(req.equation, req.y0, req.yp0, opts))

    @app.post("/v1/ivp/audit", response_model=Report)
    async def ivp_audit(req: AuditRequest):
        opts = _options(req.options)
        return machine_payload(
            "audit", opts,
            handle_audit(req.equation, req.y0, req.yp0, req.epsilons, opts))

    @app.post("/v1/mollifier/dump", response_model=Report)
    async def mollifier_dump(req: MollifierDumpRequest):
        opts = _options(req.options)
        return machine_payload("mollifier-dump", opts,
                               handle_mollifier_dump(req.nodes, opts))

    return app
