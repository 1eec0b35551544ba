"""CPLEX LP text format: a deterministic writer and a reader for the same subset
(objective, constraints, bounds, generals/binaries)."""

from __future__ import annotations

import math
import re
from typing import Iterable, Optional

import numpy as np

from .problem import LinearProblem, build_problem

_LINE = 240


def _num(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return format(float(v), ".17g")


def _terms(pairs: Iterable[tuple[str, float]]) -> list[str]:
    out = []
    for name, v in pairs:
        sign = "-" if v < 0 else "+"
        mag = abs(v)
        out.append(f"{sign} {name}" if mag == 1 else f"{sign} {_num(mag)} {name}")
    return out


def _wrap(head: str, parts: list[str]) -> list[str]:
    lines, cur = [], head
    for p in parts:
        if len(cur) + len(p) + 1 > _LINE and cur.strip():
            lines.append(cur)
            cur = "  "
        cur += (" " if cur and not cur.endswith(" ") else "") + p
    lines.append(cur)
    return lines


def format_lp(prob: LinearProblem, title: str = "", integers: bool = True) -> str:
    names = prob.column_names()
    rnames = prob.row_names or [f"r{i}" for i in range(prob.n_rows)]
    out = [f"\\ {title}"] if title else []
    out.append("Maximize" if prob.maximize else "Minimize")
    obj = [(names[j], prob.c[j]) for j in np.flatnonzero(prob.c)]
    if not obj and names:
        obj = [(names[0], 0.0)]
        out += _wrap(" obj:", [f"0 {names[0]}"])
    else:
        out += _wrap(" obj:", _terms(obj))
    if prob.offset:
        out.append(f"\\ objective offset {_num(prob.offset)}")
    out.append("Subject To")
    A = prob.A.tocsr()
    sense = {"L": "<=", "G": ">=", "E": "="}
    for i in range(prob.n_rows):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        pairs = [(names[j], v) for j, v in zip(A.indices[lo:hi], A.data[lo:hi]) if v != 0]
        parts = _terms(pairs) if pairs else ([f"0 {names[0]}"] if names else ["0"])
        out += _wrap(f" {rnames[i]}:", parts + [sense[prob.sense[i]], _num(prob.b[i])])
    out.append("Bounds")
    for j, name in enumerate(names):
        lo, hi = prob.lb[j], prob.ub[j]
        if math.isinf(lo) and math.isinf(hi):
            out.append(f" {name} free")
        elif lo == hi:
            out.append(f" {name} = {_num(lo)}")
        else:
            los = "-inf" if math.isinf(lo) else _num(lo)
            his = "+inf" if math.isinf(hi) else _num(hi)
            out.append(f" {los} <= {name} <= {his}")
    if integers and prob.is_mip:
        out.append("Generals")
        gen = [names[j] for j in np.flatnonzero(prob.integer)]
        out += _wrap("", gen)
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp(prob: LinearProblem, path, title: str = "", integers: bool = True) -> None:
    with open(path, "w") as fh:
        fh.write(format_lp(prob, title, integers))


_SECTIONS = {
    "minimize": "obj", "minimum": "obj", "min": "obj", "maximize": "obj", "maximum": "obj", "max": "obj",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows", "st.": "rows",
    "bounds": "bounds", "bound": "bounds",
    "generals": "int", "general": "int", "gen": "int", "integers": "int",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "end": "end",
}
_TOKEN = re.compile(r"\s*(<=|>=|=<|=>|<|>|=|[+-]|\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|[^\s+\-<>=]+)")
_NUMBER = re.compile(r"^(\d+\.?\d*([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?|inf|infinity)$", re.I)


class LpFormatError(ValueError):
    pass


def _tokens(text: str) -> list[str]:
    return [t for t in _TOKEN.findall(text) if t]


def _linear(tokens: list[str]) -> list[tuple[str, float]]:
    """Parse ``[+-] [coef] name ...``; pure numbers become the constant term ``''``."""
    out, sign, coef, dangling = [], 1.0, None, False
    for tok in tokens:
        if tok in "+-":
            sign = sign * (-1.0 if tok == "-" else 1.0)
            dangling = True
        elif _NUMBER.match(tok):
            coef = float(tok)
        else:
            out.append((tok, sign * (1.0 if coef is None else coef)))
            sign, coef, dangling = 1.0, None, False
    if coef is not None:
        out.append(("", sign * coef))
    elif dangling:
        raise LpFormatError(f"expression ends with a sign: {' '.join(tokens)!r}")
    return out


def parse_lp(text: str) -> LinearProblem:
    lines = []
    offset = 0.0
    for raw in text.splitlines():
        if raw.startswith("\\ objective offset "):
            offset = float(raw.split()[-1])
        line = raw.split("\\", 1)[0].rstrip()
        if line.strip():
            lines.append(line)
    section = None
    maximize = False
    chunks: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": [], "int": [], "bin": []}
    for line in lines:
        key = line.strip().lower().rstrip(":")
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section == "obj":
                maximize = key.startswith("max")
            if section == "end":
                break
            continue
        if section is None:
            raise LpFormatError(f"content before the objective section: {line!r}")
        chunks[section].append(line)

    cols: dict[str, int] = {}

    def col(name: str) -> int:
        if name not in cols:
            cols[name] = len(cols)
        return cols[name]

    obj_text = " ".join(chunks["obj"])
    if ":" in obj_text:
        obj_text = obj_text.split(":", 1)[1]
    obj = {}
    for name, v in _linear(_tokens(obj_text)):
        if name:
            obj[col(name)] = obj.get(col(name), 0.0) + v
        else:
            offset += v

    # constraints: a new one starts at a line containing "name:" or after a sense + rhs was seen
    rows, rnames, buf, pending = [], [], [], None
    row_re = re.compile(r"^\s*([^\s:]+)\s*:(.*)$")

    def flush():
        nonlocal buf, pending
        if not buf:
            return
        toks = _tokens(" ".join(buf))
        idx = next((k for k, t in enumerate(toks) if t in ("<=", ">=", "=<", "=>", "<", ">", "=")), None)
        if idx is None:
            raise LpFormatError(f"constraint without sense: {' '.join(buf)!r}")
        if idx == len(toks) - 1:
            raise LpFormatError(f"constraint without right-hand side: {' '.join(buf)!r}")
        lhs = _linear(toks[:idx])
        rhs_terms = _linear(toks[idx + 1:])
        rhs = sum(v for n, v in rhs_terms if not n)
        coefs: dict[int, float] = {}
        for n, v in lhs:
            if n:
                coefs[col(n)] = coefs.get(col(n), 0.0) + v
            else:
                rhs -= v
        for n, v in rhs_terms:
            if n:
                coefs[col(n)] = coefs.get(col(n), 0.0) - v
        s = {"<=": "L", "=<": "L", "<": "L", ">=": "G", "=>": "G", ">": "G", "=": "E"}[toks[idx]]
        rows.append((coefs, s, rhs))
        rnames.append(pending or f"r{len(rows) - 1}")
        buf, pending = [], None

    for line in chunks["rows"]:
        m = row_re.match(line)
        if m:
            flush()
            pending = m.group(1)
            buf = [m.group(2)]
        else:
            buf.append(line)
    flush()

    bounds: dict[int, list[float]] = {}
    for line in chunks["bounds"]:
        toks = line.split()
        low = [t.lower() for t in toks]
        if len(toks) == 2 and low[1] == "free":
            bounds[col(toks[0])] = [-math.inf, math.inf]
            continue
        toks = _tokens(line)
        joined = []
        k = 0
        while k < len(toks):  # merge signed numbers
            if toks[k] in "+-" and k + 1 < len(toks) and _NUMBER.match(toks[k + 1]):
                joined.append(toks[k] + toks[k + 1])
                k += 2
            else:
                joined.append(toks[k])
                k += 1

        def val(t):
            tl = t.lower().lstrip("+")
            if tl in ("inf", "infinity"):
                return math.inf
            if tl in ("-inf", "-infinity"):
                return -math.inf
            return float(t)

        if len(joined) == 5:
            j = col(joined[2])
            bounds[j] = [val(joined[0]), val(joined[4])]
        elif len(joined) == 3:
            a, op, c = joined
            if _NUMBER.match(a.lstrip("+-")):
                a, c = c, a
                op = {"<=": ">=", ">=": "<=", "=<": ">=", "=>": "<=", "=": "="}.get(op, op)
            j = col(a)
            cur = bounds.setdefault(j, [0.0, math.inf])
            if op in ("<=", "=<", "<"):
                cur[1] = val(c)
            elif op in (">=", "=>", ">"):
                cur[0] = val(c)
            else:
                cur[0] = cur[1] = val(c)
        else:
            raise LpFormatError(f"cannot read bound line {line!r}")

    integer_cols = set()
    for line in chunks["int"]:
        for t in line.split():
            integer_cols.add(col(t))
    for line in chunks["bin"]:
        for t in line.split():
            j = col(t)
            integer_cols.add(j)
            bounds[j] = [0.0, 1.0]

    n = len(cols)
    c = np.zeros(n)
    for j, v in obj.items():
        c[j] = v
    lb = np.zeros(n)
    ub = np.full(n, math.inf)
    for j, (lo, hi) in bounds.items():
        lb[j], ub[j] = lo, hi
    integer = np.zeros(n, bool)
    integer[list(integer_cols)] = True
    names = sorted(cols, key=cols.get)
    prob = build_problem(c, rows, lb, ub, integer, maximize, names)
    prob.row_names = rnames
    prob.offset = offset
    return prob


def read_lp(path) -> LinearProblem:
    with open(path) as fh:
        return parse_lp(fh.read())
