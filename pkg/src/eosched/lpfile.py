"""CPLEX-LP text export of a problem instance, and a reader for the subset we write.

Grammar written::

    \\ comment lines
    Maximize
     obj: <coef> x<i> + <coef> x<j> ...
    Subject To
     g<k>: x<i> + x<j> <= 1
     b<k>: x<i> + ... <= <cap>
     a<k>: x<i> - x<j> = 0          (or "a<k>: x<i> = 0")
     m<satellite>: <mb> x<i> + ... <= <capacity>
    Binary
     x<i> x<j> ...
    End

Row names encode the constraint family, so the file reads back into the same
row structure. Any MILP tool that understands LP format can solve the file.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .problem import MemoryRow, ProblemInstance

_TERM = re.compile(r"([+-]?)\s*((?:\d|\.\d)[0-9.eE+-]*)?\s*x(\d+)")


def _num(x: float) -> str:
    return repr(float(x))


def _wrap(terms: list[str], indent: str = "   ") -> str:
    lines, cur = [], ""
    for t in terms:
        if len(cur) + len(t) > 200:
            lines.append(cur)
            cur = indent
        cur += t
    lines.append(cur)
    return "\n".join(lines)


def write_lp(inst: ProblemInstance, path: str | os.PathLike) -> None:
    out = ["\\ eosched binary scheduling program", f"\\ columns: {inst.n}", "Maximize"]
    obj = [f"{' + ' if k else ' '}{_num(s)} x{i}" for k, (i, s) in enumerate(enumerate(inst.scores))]
    out.append(" obj:" + (_wrap(obj) if obj else ""))
    out.append("Subject To")
    for k, row in enumerate(inst.g_rows):
        out.append(f" g{k}: " + " + ".join(f"x{i}" for i in row) + " <= 1")
    for k, (idx, cap) in enumerate(inst.b_rows):
        out.append(f" b{k}: " + " + ".join(f"x{i}" for i in idx) + f" <= {cap}")
    for k, (p, m) in enumerate(inst.a_rows):
        out.append(f" a{k}: x{p}" + (f" - x{m}" if m is not None else "") + " = 0")
    for row in inst.m_rows:
        terms = [f"{' + ' if k else ''}{_num(mb)} x{i}" for k, (i, mb) in enumerate(sorted(row.usage.items()))]
        if terms:
            out.append(f" m{row.satellite}: " + _wrap(terms) + f" <= {_num(row.capacity)}")
    out.append("Binary")
    if inst.n:
        out.append(_wrap([f" x{i}" for i in range(inst.n)]))
    out.append("End")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(out) + "\n")
    tmp.replace(path)


@dataclass
class LPModel:
    objective: dict[int, float] = field(default_factory=dict)
    g_rows: list[tuple[int, ...]] = field(default_factory=list)
    b_rows: list[tuple[tuple[int, ...], int]] = field(default_factory=list)
    a_rows: list[tuple[int, int | None]] = field(default_factory=list)
    m_rows: list[MemoryRow] = field(default_factory=list)
    binaries: list[int] = field(default_factory=list)


def _terms(expr: str) -> list[tuple[float, int]]:
    out = []
    for sign, coef, var in _TERM.findall(expr):
        c = float(coef) if coef else 1.0
        out.append((-c if sign == "-" else c, int(var)))
    return out


def read_lp(path: str | os.PathLike) -> LPModel:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("\\")]
    # join continuation lines onto their statement
    section, stmts = None, []
    for ln in lines:
        head = ln.strip().lower()
        if head in ("maximize", "minimize", "subject to", "binary", "binaries", "end"):
            section = head
            stmts.append((section, None))
            continue
        if ln.startswith("   ") and stmts and stmts[-1][1] is not None:
            stmts[-1] = (stmts[-1][0], stmts[-1][1] + " " + ln.strip())
        else:
            stmts.append((section, ln.strip()))
    model = LPModel()
    for section, body in stmts:
        if body is None:
            continue
        if section == "maximize":
            expr = body.split(":", 1)[1]
            model.objective = {i: c for c, i in _terms(expr)}
        elif section == "subject to":
            name, expr = (s.strip() for s in body.split(":", 1))
            lhs, op, rhs = re.split(r"(<=|>=|=)", expr)
            terms = _terms(lhs)
            rhs = float(rhs)
            if name[0] == "g":
                model.g_rows.append(tuple(i for _, i in terms))
            elif name[0] == "b":
                model.b_rows.append((tuple(i for _, i in terms), int(rhs)))
            elif name[0] == "a":
                plus = [i for c, i in terms if c > 0]
                minus = [i for c, i in terms if c < 0]
                model.a_rows.append((plus[0], minus[0] if minus else None))
            elif name[0] == "m":
                model.m_rows.append(MemoryRow(int(name[1:]), {i: c for c, i in terms}, rhs))
            else:
                raise ValueError(f"unrecognised row name {name!r}")
        elif section in ("binary", "binaries"):
            model.binaries.extend(int(tok[1:]) for tok in body.split())
    return model
