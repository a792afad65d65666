"""Problem-file format: the textual input of the service and the CLI.

UTF-8 text with `#` comments and four sections:

    [vars]       parameter names: `t`, or `t1 t2 ...` (whitespace separated)
    [param]      one component expression per line (optional `name =` prefix)
    [integrand]  a single expression (integrate command; replaces [param])
    [branch]     `base = <point>` plus one `radical = value` line per
                 distinct radical subtree; values may use exp/pi/sqrt and
                 are evaluated numerically with principal roots
    [options]    seed / tol / samples / gb_budget

The base point entries are exact Gaussian rationals; a tuple is written
`(a, b)`.  Radical keys are matched structurally after normalization, so
the branch line must spell the radical the same way the components do.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .expressions import (
    ExprSyntaxError,
    Root,
    eval_ast_exact,
    eval_ast_numeric,
    parse_expression,
    render_ast,
)
from .gaussian import GaussianRational


class ProblemFileError(ValueError):
    """Malformed problem file; carries a line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


_VAR_RE = re.compile(r"^t([1-9][0-9]*)?$")


@dataclass
class ProblemFile:
    params: List[str] = field(default_factory=list)
    components: List[str] = field(default_factory=list)
    integrand: Optional[str] = None
    base_point: List[GaussianRational] = field(default_factory=list)
    branch_values: Dict[str, complex] = field(default_factory=dict)
    options: Dict[str, object] = field(default_factory=dict)


def _parse_base(text: str, line: int) -> List[GaussianRational]:
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        parts = text[1:-1].split(",")
    else:
        parts = [text]
    out = []
    for part in parts:
        part = part.strip()
        if not part:
            raise ProblemFileError("empty base point entry", line)
        try:
            out.append(eval_ast_exact(parse_expression(part)))
        except (ExprSyntaxError, ValueError) as exc:
            raise ProblemFileError(f"base point entry {part!r}: {exc}", line)
    return out


_OPTION_SPECS = {
    "seed": (int, lambda v: 0 <= v < 2**64),
    "tol": (float, lambda v: 0 < v <= 1e-2),
    "samples": (int, lambda v: 1 <= v <= 200),
    "gb_budget": (int, lambda v: 100 <= v <= 10**9),
}


def parse_problem_file(text: str) -> ProblemFile:
    pf = ProblemFile()
    section = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower().replace("-", "_")
            if section not in ("vars", "param", "integrand", "branch", "options"):
                raise ProblemFileError(f"unknown section [{section}]", lineno)
            if section in seen:
                raise ProblemFileError(f"duplicate section [{section}]", lineno)
            seen.add(section)
            continue
        if section is None:
            raise ProblemFileError("content before the first section header", lineno)
        if section == "vars":
            for nm in line.split():
                if not _VAR_RE.match(nm):
                    raise ProblemFileError(
                        f"parameter {nm!r} must be 't' or 't1..tn'", lineno
                    )
                if nm in pf.params:
                    raise ProblemFileError(f"duplicate parameter {nm!r}", lineno)
                pf.params.append(nm)
        elif section == "param":
            expr = line
            m = re.match(r"^[A-Za-z_][A-Za-z_0-9]*\s*=\s*(.+)$", line)
            if m:
                expr = m.group(1)
            try:
                parse_expression(expr)
            except ExprSyntaxError as exc:
                raise ProblemFileError(f"component: {exc}", lineno)
            pf.components.append(expr)
        elif section == "integrand":
            if pf.integrand is not None:
                raise ProblemFileError("multiple integrand expressions", lineno)
            try:
                parse_expression(line)
            except ExprSyntaxError as exc:
                raise ProblemFileError(f"integrand: {exc}", lineno)
            pf.integrand = line
        elif section == "branch":
            if "=" not in line:
                raise ProblemFileError("branch lines must be 'key = value'", lineno)
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key == "base":
                pf.base_point = _parse_base(value, lineno)
                continue
            try:
                node = parse_expression(key)
            except ExprSyntaxError as exc:
                raise ProblemFileError(f"branch key: {exc}", lineno)
            if not isinstance(node, Root):
                raise ProblemFileError(
                    f"branch key {key!r} is not a radical expression", lineno
                )
            try:
                val = eval_ast_numeric(parse_expression(value, transcendental=True))
            except (ExprSyntaxError, ValueError) as exc:
                raise ProblemFileError(f"branch value: {exc}", lineno)
            canon = render_ast(node)
            if canon in pf.branch_values:
                raise ProblemFileError(f"duplicate branch value for {key!r}", lineno)
            pf.branch_values[canon] = val
        elif section == "options":
            if "=" not in line:
                raise ProblemFileError("options lines must be 'name = value'", lineno)
            key, _, value = line.partition("=")
            key = key.strip().lower()
            value = value.strip()
            if key not in _OPTION_SPECS:
                raise ProblemFileError(f"unknown option {key!r}", lineno)
            typ, check = _OPTION_SPECS[key]
            try:
                parsed = typ(value)
            except ValueError:
                raise ProblemFileError(f"option {key!r}: bad value {value!r}", lineno)
            if not check(parsed):
                raise ProblemFileError(f"option {key!r}: value out of range", lineno)
            pf.options[key] = parsed

    if not pf.params:
        raise ProblemFileError("missing [vars] section or no parameters")
    if len(pf.params) == 1:
        if pf.params[0] not in ("t", "t1"):
            raise ProblemFileError("a single parameter must be named 't' or 't1'")
    else:
        expect = [f"t{i+1}" for i in range(len(pf.params))]
        if pf.params != expect:
            raise ProblemFileError(f"parameters must be named {' '.join(expect)}")
    if pf.integrand is None and not pf.components:
        raise ProblemFileError("no [param] components and no [integrand]")
    if pf.integrand is not None and len(pf.params) != 1:
        raise ProblemFileError("[integrand] requires exactly one parameter")
    if len(pf.base_point) != len(pf.params):
        raise ProblemFileError(
            f"base point has {len(pf.base_point)} entries for {len(pf.params)} parameters"
        )
    return pf
