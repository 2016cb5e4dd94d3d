"""Reader/writer for the LP text subset used to store problem instances.

Layout: ``Minimize`` with a single ``obj:`` line, optional ``Subject To``
rows (one per line), a ``Bounds`` block listing every variable, an optional
``Binary`` block, and a closing ``End``. Keywords are case sensitive.
The writer is canonical: identical problems serialize byte-identically, and
``parse_lp(write_lp(p)) == p``.
"""

from __future__ import annotations

import math
import re

from .milp import BINARY, CONTINUOUS, Constraint, MilpProblem, Variable

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><=|>=|=|\+|-|:))"
)

_INF_WORDS = {"inf", "+inf", "-inf"}


class LpParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _num(x: float) -> str:
    if x == math.inf:
        return "+inf"
    if x == -math.inf:
        return "-inf"
    return repr(float(x))


def _terms_text(terms: dict[str, float], offset: float = 0.0) -> str:
    parts: list[str] = []
    for var, coef in terms.items():
        if not parts:
            parts.append(f"-{_num(-coef)} {var}" if coef < 0 else f"{_num(coef)} {var}")
        else:
            sign = "-" if coef < 0 else "+"
            parts.append(f"{sign} {_num(abs(coef))} {var}")
    if offset != 0.0 or not parts:
        if not parts:
            parts.append(_num(offset))
        else:
            sign = "-" if offset < 0 else "+"
            parts.append(f"{sign} {_num(abs(offset))}")
    return " ".join(parts)


def write_lp(problem: MilpProblem) -> str:
    lines = ["Minimize", " obj: " + _terms_text(problem.objective, problem.offset)]
    if problem.constraints:
        lines.append("Subject To")
        for con in problem.constraints:
            lines.append(
                f" {con.name}: {_terms_text(con.terms)} {con.sense} {_num(con.rhs)}"
            )
    lines.append("Bounds")
    for var in problem.variables:
        lines.append(f" {_num(var.lower)} <= {var.name} <= {_num(var.upper)}")
    binaries = [v.name for v in problem.variables if v.kind == BINARY]
    if binaries:
        lines.append("Binary")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


def _tokenize(line: str, lineno: int) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(line):
        if line[pos:].strip() == "":
            break
        m = _TOKEN.match(line, pos)
        if m is None:
            raise LpParseError(lineno, f"unexpected character {line[pos]!r}")
        for kind in ("num", "name", "op"):
            if m.group(kind) is not None:
                tokens.append((kind, m.group(kind)))
                break
        pos = m.end()
    return tokens


def _parse_linear(tokens: list[tuple[str, str]], lineno: int) -> tuple[dict[str, float], float]:
    """Parse ``[+-] coef name ... [+-] const`` with optional signs and spacing."""
    terms: dict[str, float] = {}
    offset = 0.0
    i = 0
    while i < len(tokens):
        sign = 1.0
        while i < len(tokens) and tokens[i][0] == "op":
            if tokens[i][1] == "-":
                sign = -sign
            elif tokens[i][1] != "+":
                raise LpParseError(lineno, f"unexpected {tokens[i][1]!r} in expression")
            i += 1
        if i >= len(tokens):
            raise LpParseError(lineno, "dangling sign at end of expression")
        kind, text = tokens[i]
        if kind == "num":
            value = sign * float(text)
            i += 1
            if i < len(tokens) and tokens[i][0] == "name":
                name = tokens[i][1]
                if name in terms:
                    raise LpParseError(lineno, f"duplicate term for variable {name!r}")
                terms[name] = value
                i += 1
            else:
                offset += value
        elif kind == "name":
            if text in terms:
                raise LpParseError(lineno, f"duplicate term for variable {text!r}")
            terms[text] = sign
            i += 1
        else:
            raise LpParseError(lineno, f"unexpected token {text!r} in expression")
    return terms, offset


def _split_relation(tokens: list[tuple[str, str]], lineno: int):
    idx = [i for i, (k, t) in enumerate(tokens) if k == "op" and t in ("<=", ">=", "=")]
    if len(idx) != 1:
        raise LpParseError(lineno, "expected exactly one of <=, =, >=")
    i = idx[0]
    return tokens[:i], tokens[i][1], tokens[i + 1 :]


def parse_lp(text: str) -> MilpProblem:
    lines = text.splitlines()
    section = None
    objective: dict[str, float] = {}
    offset = 0.0
    constraints: list[Constraint] = []
    con_names: set[str] = set()
    bounds: dict[str, tuple[float, float]] = {}  # insertion order = variable order
    binaries: set[str] = set()
    mention_line: dict[str, int] = {}
    saw_minimize = False
    saw_end = False

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if saw_end:
            raise LpParseError(lineno, "content after End")
        if line in ("Minimize", "Subject To", "Bounds", "Binary", "End"):
            section = line
            if line == "Minimize":
                saw_minimize = True
            if line == "End":
                saw_end = True
            continue
        if section is None:
            raise LpParseError(lineno, f"expected a section keyword, got {line!r}")
        if section == "Minimize":
            if not line.startswith("obj:"):
                raise LpParseError(lineno, "objective line must start with 'obj:'")
            tokens = _tokenize(line[len("obj:"):], lineno)
            objective, offset = _parse_linear(tokens, lineno)
            for var in objective:
                mention_line.setdefault(var, lineno)
        elif section == "Subject To":
            name, sep, rest = line.partition(":")
            if not sep or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name.strip()):
                raise LpParseError(lineno, "constraint row must start with '<name>:'")
            name = name.strip()
            if name in con_names:
                raise LpParseError(lineno, f"duplicate constraint name {name!r}")
            con_names.add(name)
            lhs_toks, sense, rhs_toks = _split_relation(_tokenize(rest, lineno), lineno)
            terms, lhs_const = _parse_linear(lhs_toks, lineno)
            rhs_terms, rhs_const = _parse_linear(rhs_toks, lineno)
            if rhs_terms:
                raise LpParseError(lineno, "right-hand side must be a constant")
            for var in terms:
                mention_line.setdefault(var, lineno)
            constraints.append(Constraint(name, terms, sense, rhs_const - lhs_const))
        elif section == "Bounds":
            parsed = _parse_bounds_line(line, lineno)
            name, lo, hi = parsed
            if name in bounds:
                raise LpParseError(lineno, f"duplicate bounds for variable {name!r}")
            bounds[name] = (lo, hi)
        elif section == "Binary":
            for tok in line.split():
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
                    raise LpParseError(lineno, f"bad variable name {tok!r}")
                binaries.add(tok)
                mention_line.setdefault(tok, lineno)

    if not saw_minimize:
        raise LpParseError(len(lines) or 1, "missing Minimize section")
    if not saw_end:
        raise LpParseError(len(lines) or 1, "missing End keyword")

    names = list(bounds)
    known = set(names)
    mentioned = set(objective) | {v for c in constraints for v in c.terms} | binaries
    for var in sorted(mentioned - known):
        raise LpParseError(
            mention_line.get(var, len(lines)), f"unknown variable {var!r} (no Bounds line)"
        )
    variables = []
    for name in names:
        lo, hi = bounds[name]
        kind = BINARY if name in binaries else CONTINUOUS
        variables.append(Variable(name, kind, lo, hi))
    return MilpProblem(
        variables=tuple(variables),
        objective=objective,
        offset=offset,
        constraints=tuple(constraints),
    )


def _parse_bounds_line(line: str, lineno: int) -> tuple[str, float, float]:
    # "<lo> <= <name> <= <hi>" where lo/hi are numbers or +-inf.
    parts = line.split()
    if len(parts) != 5 or parts[1] != "<=" or parts[3] != "<=":
        raise LpParseError(lineno, "bounds line must read '<lo> <= <var> <= <hi>'")
    lo_s, _, name, _, hi_s = parts

    def bound(tok: str) -> float:
        low = tok.lower()
        if low in _INF_WORDS:
            return -math.inf if low.startswith("-") else math.inf
        try:
            return float(tok)
        except ValueError:
            raise LpParseError(lineno, f"bad bound value {tok!r}") from None

    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        raise LpParseError(lineno, f"bad variable name {name!r}")
    return name, bound(lo_s), bound(hi_s)
