"""Expression DSL: tokenizer, recursive-descent parser, printer, evaluators.

Grammar:

    relation := expr (('~=' | '=' | '~') expr)?
    expr     := term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := '-' factor | power
    power    := base ('^' exponent)?
    exponent := ('-')? (number | '(' expr ')')
    base     := number | symbol | func '(' expr (',' expr)* ')' | '(' expr ')'

Symbols: s (the scale; reserved), i, t, and the solver unknowns y, y', y''.
z never appears in parseable input -- it lives on the transform side only.
Functions: sin, cos, exp, H, delta, delta_n(k, .).
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .errors import DomainError, ParseError
from .genfunc import Algebra, GenFunction
from .levicivita import LCComplex, LCReal, as_lc_complex, as_lc_real
from .smooth import AffineFn, CosFn, ExpFn, PolyFn, SinFn, exp_lc

_FUNCTIONS = ("sin", "cos", "exp", "H", "delta_n", "delta")
_SYMBOLS = ("s", "i", "t", "y''", "y'", "y")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    text: str  # literal as written: "2", "0.5", "1e-3"

    @property
    def value(self) -> float:
        return float(self.text)

    @property
    def fraction(self) -> Optional[Fraction]:
        try:
            return Fraction(self.text)
        except ValueError:
            return None


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


@dataclass(frozen=True)
class Bin:
    op: str  # + - * / ^
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Neg:
    arg: object


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*'{0,2})
  | (?P<op>~=|[-+*/^()=,~])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    out = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            out.append(Token(kind, tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    out.append(Token("end", "", line, col))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.toks[self.pos]

    def take(self) -> Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.take()
        if tok.text != text:
            raise ParseError(
                f"expected {text!r} but found {tok.text or 'end of input'!r}",
                tok.line, tok.col)
        return tok

    def fail(self, msg: str, tok: Token):
        raise ParseError(msg, tok.line, tok.col)

    # grammar ---------------------------------------------------------------

    def relation(self):
        lhs = self.expr()
        tok = self.peek()
        if tok.text in ("~=", "=", "~"):
            self.take()
            rhs = self.expr()
            self._finish()
            return lhs, tok.text, rhs
        self._finish()
        return lhs, None, None

    def expression(self):
        node = self.expr()
        self._finish()
        return node

    def _finish(self):
        tok = self.peek()
        if tok.kind != "end":
            self.fail(f"unexpected trailing {tok.text!r}", tok)

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            node = Bin(op, node, self.factor())
        return node

    def factor(self):
        if self.peek().text == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self):
        node = self.base()
        if self.peek().text == "^":
            self.take()
            node = Bin("^", node, self.exponent())
        return node

    def exponent(self):
        if self.peek().text == "-":
            self.take()
            return Neg(self.exponent())
        tok = self.peek()
        if tok.kind == "number":
            return Num(self.take().text)
        if tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("exponents are rational literals or parenthesized", tok)

    def base(self):
        tok = self.take()
        if tok.kind == "number":
            return Num(tok.text)
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            if tok.text in _FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.peek().text == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if tok.text == "delta_n":
                    if len(args) != 2:
                        self.fail("delta_n takes (order, argument)", tok)
                elif len(args) != 1:
                    self.fail(f"{tok.text} takes one argument", tok)
                return Call(tok.text, tuple(args))
            if tok.text in _SYMBOLS:
                return Sym(tok.text)
            if tok.text == "z":
                self.fail("z is the transform variable and cannot appear in "
                          "time-domain input; the scale symbol is s", tok)
            self.fail(f"unknown name {tok.text!r}", tok)
        self.fail(f"unexpected {tok.text or 'end of input'!r}", tok)


def parse_expression(text: str):
    return _Parser(text).expression()


def parse_relation(text: str):
    """(lhs, op, rhs) where op is '~=', '=', '~', or None for a bare expr."""
    return _Parser(text).relation()


# ---------------------------------------------------------------------------
# printer (canonical; inverse of the parser on its own output)
# ---------------------------------------------------------------------------


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def print_ast(node, parent_prec: int = 0) -> str:
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Call):
        return node.fn + "(" + ", ".join(print_ast(a) for a in node.args) + ")"
    if isinstance(node, Neg):
        inner = print_ast(node.arg, _PREC["neg"])
        out = "-" + inner
        return f"({out})" if parent_prec > _PREC["neg"] else out
    if isinstance(node, Bin):
        p = _PREC[node.op]
        # '-' and '/' are left-associative: right child needs a bump;
        # '^' is non-associative: both children need one
        lhs = print_ast(node.lhs, p + 1 if node.op == "^" else p)
        rhs = print_ast(node.rhs, p + 1)
        out = f"{lhs} {node.op} {rhs}" if node.op in "+-" else \
            f"{lhs}{node.op}{rhs}"
        return f"({out})" if p < parent_prec else out
    raise TypeError(f"not an AST node: {node!r}")


# ---------------------------------------------------------------------------
# scalar evaluation (lc-eval)
# ---------------------------------------------------------------------------


def _lc_power(base: LCComplex, expo, ctx) -> LCComplex:
    if isinstance(expo, Fraction) and expo.denominator == 1:
        expo = int(expo)
    if isinstance(expo, int):
        if expo >= 0:
            acc = as_lc_complex(1.0, ctx)
            for _ in range(expo):
                acc = acc * base
            return acc
        return _lc_power(base, -expo, ctx).invert()
    # rational exponent: real positive-leading base required
    if not base.is_real:
        raise DomainError("rational powers need a real base")
    root = base.re.nth_root(expo.denominator)
    return _lc_power(as_lc_complex(root, ctx), expo.numerator, ctx)


def _exponent_fraction(node) -> Fraction:
    if isinstance(node, Num):
        f = node.fraction
        if f is None:
            raise ParseError(f"exponent {node.text!r} is not rational")
        return f
    if isinstance(node, Neg):
        return -_exponent_fraction(node.arg)
    if isinstance(node, Bin) and node.op == "/":
        return _exponent_fraction(node.lhs) / _exponent_fraction(node.rhs)
    raise ParseError("exponents must be rational literals")


def eval_scalar(node, ctx) -> LCComplex:
    """Evaluate an expression over the scalar field (symbols s and i only)."""
    if isinstance(node, Num):
        f = node.fraction
        return as_lc_complex(float(f) if f is not None else node.value, ctx)
    if isinstance(node, Sym):
        if node.name == "s":
            return as_lc_complex(LCReal.scale(ctx), ctx)
        if node.name == "i":
            return as_lc_complex(1.0j, ctx)
        raise ParseError(f"symbol {node.name!r} is not a scalar")
    if isinstance(node, Neg):
        return -eval_scalar(node.arg, ctx)
    if isinstance(node, Call):
        w = eval_scalar(node.args[-1], ctx)
        if node.fn == "exp":
            return exp_lc(w, ctx)
        if node.fn == "sin":
            rot = exp_lc(w * 1.0j, ctx)
            return (rot - exp_lc(w * (-1.0j), ctx)) * (-0.5j)
        if node.fn == "cos":
            return (exp_lc(w * 1.0j, ctx) + exp_lc(w * (-1.0j), ctx)) * 0.5
        raise ParseError(f"{node.fn} is not a scalar function")
    if isinstance(node, Bin):
        if node.op == "^":
            return _lc_power(eval_scalar(node.lhs, ctx),
                             _exponent_fraction(node.rhs), ctx)
        a = eval_scalar(node.lhs, ctx)
        b = eval_scalar(node.rhs, ctx)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a * b.invert()
    raise TypeError(f"not an AST node: {node!r}")


# ---------------------------------------------------------------------------
# time-domain evaluation (generalized functions)
# ---------------------------------------------------------------------------


def _affine_in_t(node, ctx) -> Tuple[float, LCComplex]:
    """Read node as a*t + b with a real and b an LC scalar."""
    if isinstance(node, Sym) and node.name == "t":
        return 1.0, as_lc_complex(0.0, ctx)
    if isinstance(node, Neg):
        a, b = _affine_in_t(node.arg, ctx)
        return -a, -b
    if isinstance(node, Bin):
        if node.op in ("+", "-"):
            a1, b1 = _affine_in_t(node.lhs, ctx)
            a2, b2 = _affine_in_t(node.rhs, ctx)
            if node.op == "-":
                a2, b2 = -a2, -b2
            return a1 + a2, b1 + b2
        if node.op == "*":
            for first, second in ((node.lhs, node.rhs), (node.rhs, node.lhs)):
                try:
                    c = eval_scalar(first, ctx)
                except (ParseError, DomainError):
                    continue
                if not c.is_real:
                    raise DomainError("t-coefficients must be real")
                a, b = _affine_in_t(second, ctx)
                cst = c.re.standard_part()
                if abs(a) > 0 and not (c.re - cst).is_zero:
                    raise DomainError(
                        "the t-coefficient of an argument must be standard")
                return a * cst, b * c
            raise ParseError("argument must be affine in t")
        if node.op == "/":
            a, b = _affine_in_t(node.lhs, ctx)
            c = eval_scalar(node.rhs, ctx)
            if not c.is_real:
                raise DomainError("t-coefficients must be real")
            cst = c.re.standard_part()
            if abs(a) > 0 and not (c.re - cst).is_zero:
                raise DomainError(
                    "the t-coefficient of an argument must be standard")
            inv = c.invert()
            return a / cst if a else 0.0, b * inv
    # no t at all: a scalar offset
    return 0.0, eval_scalar(node, ctx)


def _shift_of(b: LCComplex, a: float, ctx) -> LCReal:
    """Solve a*t + b = 0 for the (LC real) location t = -b/a."""
    if not b.is_real:
        raise DomainError("singular-atom locations must be real")
    return as_lc_real(b.re * (-1.0 / a), ctx)


def _atom_from_affine(fn_name: str, k: int, arg, alg: Algebra) -> GenFunction:
    ctx = alg.ctx
    a, b = _affine_in_t(arg, ctx)
    if a == 0.0:
        raise DomainError(f"{fn_name} needs an argument that varies with t")
    if fn_name in ("delta", "delta_n"):
        loc = _shift_of(b, a, ctx)
        center = loc.standard_part()
        coef = (1.0 / abs(a)) * (a ** (-k))
        g = alg.delta(center=center, shift=loc - center, order=k)
        return coef * g
    if fn_name == "H":
        loc = _shift_of(b, a, ctx)
        center = loc.standard_part()
        g = alg.heaviside(center=center, shift=loc - center)
        return g if a > 0 else alg.constant(1.0) - g
    base = {"sin": SinFn, "cos": CosFn, "exp": ExpFn}[fn_name]()
    br = b.re.standard_part() if b.is_real else None
    if br is None:
        raise DomainError("smooth arguments must be real")
    infpart = b.re - br
    fn = base if (a == 1.0 and br == 0.0) else AffineFn(base, a, br)
    shift = as_lc_real(infpart * (-1.0 / a), ctx)
    return alg.smooth(fn, shift=shift)


def eval_time_expression(node, alg: Algebra):
    """Evaluate to a GenFunction (or an LCComplex for pure-scalar input)."""
    ctx = alg.ctx

    def ev(n):
        if isinstance(n, (Num,)):
            return eval_scalar(n, ctx)
        if isinstance(n, Sym):
            if n.name == "t":
                return alg.smooth(PolyFn((0.0, 1.0)))
            if n.name in ("y", "y'", "y''"):
                raise ParseError(
                    f"{n.name} belongs on the left side of an equation")
            return eval_scalar(n, ctx)
        if isinstance(n, Neg):
            return -ev(n.arg)
        if isinstance(n, Call):
            if n.fn in ("H", "delta"):
                return _atom_from_affine(n.fn, 0, n.args[0], alg)
            if n.fn == "delta_n":
                korder = n.args[0]
                kf = _exponent_fraction(korder)
                if kf.denominator != 1 or kf < 0:
                    raise ParseError("delta_n order must be a nonnegative integer")
                return _atom_from_affine("delta_n", int(kf), n.args[1], alg)
            if n.fn in ("sin", "cos", "exp"):
                try:
                    return eval_scalar(n, ctx)  # e.g. exp(2*s)
                except (ParseError, DomainError):
                    return _atom_from_affine(n.fn, 0, n.args[0], alg)
            raise ParseError(f"unknown function {n.fn!r}")
        if isinstance(n, Bin):
            if n.op == "^":
                expo = _exponent_fraction(n.rhs)
                basev = ev(n.lhs)
                if isinstance(basev, LCComplex):
                    return _lc_power(basev, expo, ctx)
                if expo.denominator != 1 or expo <= 0:
                    raise DomainError(
                        "generalized functions take positive integer powers")
                acc = basev
                for _ in range(int(expo) - 1):
                    acc = acc * basev
                return acc
            a, b = ev(n.lhs), ev(n.rhs)
            if n.op == "+":
                return _promote_add(a, b, alg)
            if n.op == "-":
                return _promote_add(a, _negate(b), alg)
            if n.op == "*":
                return a * b
            # division
            if isinstance(b, LCComplex):
                return a * b.invert()
            raise DomainError("cannot divide by a generalized function")
        raise TypeError(f"not an AST node: {n!r}")

    return ev(node)


def _negate(v):
    return -v


def _promote_add(a, b, alg: Algebra):
    if isinstance(a, LCComplex) and isinstance(b, LCComplex):
        return a + b
    if isinstance(a, LCComplex):
        a = alg.constant(a)
    if isinstance(b, LCComplex):
        b = alg.constant(b)
    return a + b


def as_genfunction(value, alg: Algebra) -> GenFunction:
    if isinstance(value, GenFunction):
        return value
    return alg.constant(value)


# ---------------------------------------------------------------------------
# classical-context screening and equation parsing
# ---------------------------------------------------------------------------


def reject_scale_symbol(node, context: str):
    """The scale s may not appear in classical-only contexts (desk rulesets)."""
    if isinstance(node, Sym) and node.name == "s":
        raise ParseError(
            f"the scale symbol s is reserved and cannot appear in the "
            f"{context} context")
    if isinstance(node, Call):
        for a in node.args:
            reject_scale_symbol(a, context)
    elif isinstance(node, Bin):
        reject_scale_symbol(node.lhs, context)
        reject_scale_symbol(node.rhs, context)
    elif isinstance(node, Neg):
        reject_scale_symbol(node.arg, context)


@dataclass(frozen=True)
class IVPEquation:
    a2: float
    a1: float
    a0: float
    rhs_ast: object
    mode: str  # "weak" for ~=, "exact" for =


def _linear_lhs(node, coeffs: dict, sign: float):
    """Accumulate coefficients of y'', y', y from a linear expression."""
    if isinstance(node, Bin) and node.op in ("+", "-"):
        _linear_lhs(node.lhs, coeffs, sign)
        _linear_lhs(node.rhs, coeffs, sign if node.op == "+" else -sign)
        return
    if isinstance(node, Neg):
        _linear_lhs(node.arg, coeffs, -sign)
        return
    if isinstance(node, Sym) and node.name in ("y", "y'", "y''"):
        coeffs[node.name] = coeffs.get(node.name, 0.0) + sign
        return
    if isinstance(node, Bin) and node.op == "*":
        for cnode, ynode in ((node.lhs, node.rhs), (node.rhs, node.lhs)):
            if isinstance(ynode, Sym) and ynode.name in ("y", "y'", "y''"):
                try:
                    c = float(_exponent_fraction(cnode))
                except ParseError:
                    raise ParseError(
                        "equation coefficients must be rational literals")
                coeffs[ynode.name] = coeffs.get(ynode.name, 0.0) + sign * c
                return
    raise ParseError(
        "the left side must be a linear combination of y'', y', y")


def parse_ivp(text: str) -> IVPEquation:
    lhs, op, rhs = parse_relation(text)
    if op not in ("~=", "="):
        raise ParseError("an equation needs '~=' (weak) or '=' (exact)")
    coeffs = {}
    _linear_lhs(lhs, coeffs, 1.0)
    if not coeffs:
        raise ParseError("no y-terms found on the left side")
    return IVPEquation(coeffs.get("y''", 0.0), coeffs.get("y'", 0.0),
                       coeffs.get("y", 0.0), rhs,
                       "weak" if op == "~=" else "exact")
