"""Report assembly: option plumbing, machine payloads, and text rendering.

Machine output is a single JSON document with a top-level schema_version,
sorted keys, and fixed separators -- the same command with the same options
and seed produces byte-identical output.  Text output echoes the inputs and
every option (seed included) before the result, in aligned tables.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError
from .genfunc import Algebra
from .levicivita import (
    LCComplex,
    TruncationContext,
    lc_to_records,
    records_to_lc,
)
from .mollify import QuadratureScheme

SCHEMA_VERSION = "1"

_RULESETS = ("naive", "engineer", "hat")


@dataclass(frozen=True)
class Options:
    """The full option set every command echoes."""
    trunc: str = "6"
    moment_order: int = 2
    quad_tol: float = 1e-12
    battery: int = 32
    seed: int = 0
    ruleset: str = "hat"

    def validate(self) -> "Options":
        try:
            q = Fraction(self.trunc)
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"--trunc must be rational, got {self.trunc!r}")
        if q < 0:
            raise DomainError("--trunc must be nonnegative")
        if self.moment_order < 0:
            raise DomainError("--moment-order must be nonnegative")
        if not (self.quad_tol > 0.0):
            raise DomainError("--quad-tol must be positive")
        if self.battery < 1:
            raise DomainError("--battery must be at least 1")
        if self.ruleset not in _RULESETS:
            raise DomainError(
                f"--ruleset must be one of {', '.join(_RULESETS)}")
        return self

    def as_dict(self) -> dict:
        return {
            "trunc": self.trunc,
            "moment_order": self.moment_order,
            "quad_tol": self.quad_tol,
            "battery": self.battery,
            "seed": self.seed,
            "ruleset": self.ruleset,
        }


def build_algebra(options: Options) -> Algebra:
    options.validate()
    ctx = TruncationContext(q_max=Fraction(options.trunc))
    scheme = QuadratureScheme(abs_tol=options.quad_tol,
                              rel_tol=options.quad_tol)
    return Algebra(ctx=ctx, moment_order=options.moment_order, scheme=scheme)


def lc_payload(value: LCComplex) -> dict:
    return {
        "records": lc_to_records(value),
        "pretty": str(value),
        "classification": value.classify().value,
    }


def records_pretty(records: list) -> str:
    return str(records_to_lc(records))


def machine_payload(command: str, options: Options, result: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "options": options.as_dict(),
        "result": result,
    }


def render_machine(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# text rendering
# ---------------------------------------------------------------------------


def align(rows, indent: str = "  ") -> list:
    """Left-align columns across rows of string cells."""
    rows = [[str(c) for c in row] for row in rows]
    if not rows:
        return []
    widths = [max(len(r[i]) for r in rows if i < len(r))
              for i in range(max(len(r) for r in rows))]
    out = []
    for row in rows:
        cells = [c.ljust(widths[i]) for i, c in enumerate(row)]
        out.append((indent + "  ".join(cells)).rstrip())
    return out


def records_table(records: list) -> list:
    rows = [["exp", "re", "im"]]
    for r in records:
        rows.append([r["exp"], repr(r["re"]), repr(r["im"])])
    if len(rows) == 1:
        rows.append(["-", "0.0", "0.0"])
    return align(rows, indent="    ")


def text_header(command: str, inputs: dict, options: Options) -> list:
    lines = [f"lcgf {command}"]
    in_rows = [[k, v] for k, v in inputs.items()]
    if in_rows:
        lines.append("input")
        lines.extend(align(in_rows))
    lines.append("options")
    opt_rows = [[k.replace("_", "-"), repr(v) if isinstance(v, float) else str(v)]
                for k, v in options.as_dict().items()]
    lines.extend(align(opt_rows))
    lines.append("result")
    return lines


def render_text(command: str, inputs: dict, options: Options,
                body: list) -> str:
    return "\n".join(text_header(command, inputs, options) + body) + "\n"
