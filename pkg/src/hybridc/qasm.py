"""CVDV-QASM: a small text format for Pauli statements and native hybrid gates.

Grammar (one statement per ``;``, ``//`` starts a comment)::

    program   := header? decl* stmt*
    header    := "CVDVQASM" NUMBER ";"
    decl      := ("qubits" | "qumodes") INT ";"
    stmt      := "pauli" "(" expr ")" WORD ";"
               | NAME ( "(" expr ("," expr)* ")" )? operand ("," operand)* ";"
    operand   := "q[" INT "]" | "qm[" INT "]"
    expr      := term (("+" | "-") term)*
    term      := unary (("*" | "/") unary)*
    unary     := "-" unary | "+" unary | atom
    atom      := NUMBER | NUMBER "i" | "i" | "pi" | "(" expr ")"

Gate operands list qubits before qumodes.  Without ``qubits``/``qumodes``
declarations the register sizes are inferred as the largest index used plus
one (Pauli word length counts for qubits).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .gates import COMPLEX_PARAM, GATE_SPECS, GateOp

HEADER = "CVDVQASM 1.0;"


class QasmError(ValueError):
    def __init__(self, msg, line=None, col=None):
        self.msg, self.line, self.col = msg, line, col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + msg)


@dataclass(frozen=True)
class PauliStmt:
    angle: float
    word: str

    @property
    def support(self):
        return tuple(i for i, c in enumerate(self.word) if c != "I")

    @property
    def qubits(self):
        return self.support

    @property
    def qumodes(self):
        return ()


@dataclass
class Program:
    nq: int = 0
    nm: int = 0
    statements: list = field(default_factory=list)

    def validate(self):
        for s in self.statements:
            if isinstance(s, PauliStmt):
                if len(s.word) != self.nq:
                    raise QasmError(f"Pauli word {s.word!r} has length {len(s.word)}, register has {self.nq}")
            else:
                if any(not 0 <= i < self.nq for i in s.qubits):
                    raise QasmError(f"qubit operand out of range in {s}")
                if any(not 0 <= k < self.nm for k in s.qumodes):
                    raise QasmError(f"qumode operand out of range in {s}")
        return self

    def gates(self):
        return [s for s in self.statements if isinstance(s, GateOp)]

    def paulis(self):
        return [s for s in self.statements if isinstance(s, PauliStmt)]

    def __eq__(self, other):
        return (isinstance(other, Program) and self.nq == other.nq and self.nm == other.nm
                and self.statements == other.statements)


# ------------------------------------------------------------- expressions

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)(?P<imag>i(?![A-Za-z_]))?"
    r"|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/(),]))"
)


class _Expr:
    def __init__(self, text, line, col0):
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None or m.end() == pos:
                pos += len(text[pos:]) - len(text[pos:].lstrip())
                raise QasmError(f"unexpected character {text[pos]!r}", line, col0 + pos)
            start = m.start(m.lastgroup) if m.lastgroup else pos
            if m.group("num") is not None:
                v = float(m.group("num"))
                self.toks.append(("num", v * 1j if m.group("imag") else v, col0 + start))
            elif m.group("name") is not None:
                self.toks.append(("name", m.group("name"), col0 + start))
            else:
                self.toks.append(("op", m.group("op"), col0 + start))
            pos = m.end()
        self.i = 0
        self.line = line
        self.col_end = col0 + len(text)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, self.col_end)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self):
        v = self.expr()
        kind, val, col = self.peek()
        if kind is not None:
            raise QasmError(f"unexpected token {val!r} in expression", self.line, col)
        return v

    def expr(self):
        v = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            r = self.term()
            v = v + r if op == "+" else v - r
        return v

    def term(self):
        v = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            r = self.unary()
            if op == "*":
                v = v * r
            else:
                if r == 0:
                    raise QasmError("division by zero", self.line, self.peek()[2])
                v = v / r
        return v

    def unary(self):
        kind, val, col = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            v = self.unary()
            return -v if val == "-" else v
        return self.atom()

    def atom(self):
        kind, val, col = self.take()
        if kind == "num":
            return val
        if kind == "name":
            if val == "pi":
                return math.pi
            if val == "i":
                return 1j
            raise QasmError(f"unknown identifier {val!r}", self.line, col)
        if kind == "op" and val == "(":
            v = self.expr()
            k2, v2, c2 = self.take()
            if (k2, v2) != ("op", ")"):
                raise QasmError("expected ')'", self.line, c2)
            return v
        raise QasmError("expected a number", self.line, col)


def _split_params(text, line, col0):
    """Split a parameter list on top-level commas."""
    out, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            out.append((text[start:i], col0 + start))
            start = i + 1
    out.append((text[start:], col0 + start))
    return out


def eval_expr(text, line=None, col=1):
    return _Expr(text, line, col).parse()


# ------------------------------------------------------------------ parser

_STMT_RE = re.compile(r"\s*(?P<name>[A-Za-z_]\w*)\s*(?P<params>\()?")
_OPERAND_RE = re.compile(r"\s*(?P<reg>qm|q)\s*\[\s*(?P<idx>\d+)\s*\]\s*")


def _statements(text):
    """Yield (body, line, col) per ';'-terminated statement with comments removed."""
    clean_lines = [raw.split("//", 1)[0] for raw in text.splitlines()]
    buf, start = [], None
    for lineno, raw in enumerate(clean_lines, 1):
        col = 0
        pieces = raw.split(";")
        for j, piece in enumerate(pieces):
            if start is None and piece.strip():
                start = (lineno, col + len(piece) - len(piece.lstrip()) + 1)
            buf.append(piece)
            col += len(piece) + 1
            if j < len(pieces) - 1:
                body = " ".join(buf).strip()
                if body:
                    yield body, start[0], start[1]
                elif start is None:
                    raise QasmError("empty statement", lineno, col)
                buf, start = [], None
    if "".join(buf).strip():
        raise QasmError("missing ';' at end of statement", start[0], start[1])


def _find_close(body, open_idx, line, col):
    depth = 0
    for i in range(open_idx, len(body)):
        if body[i] == "(":
            depth += 1
        elif body[i] == ")":
            depth -= 1
            if depth == 0:
                return i
    raise QasmError("unbalanced parentheses", line, col + open_idx)


def parse(text):
    """Parse CVDV-QASM text into a validated Program."""
    stmts = []
    decl = {}
    max_q = max_m = -1
    word_len = None
    for body, line, col in _statements(text):
        m = _STMT_RE.match(body)
        if m is None:
            raise QasmError("expected a statement", line, col)
        name = m.group("name")
        if name == "CVDVQASM":
            continue
        if name in ("qubits", "qumodes"):
            rest = body[m.end():].strip()
            if not rest.isdigit():
                raise QasmError(f"'{name}' needs a non-negative integer", line, col)
            if name in decl:
                raise QasmError(f"duplicate '{name}' declaration", line, col)
            decl[name] = int(rest)
            continue
        params = []
        pos = m.end()
        if m.group("params"):
            close = _find_close(body, m.start("params"), line, col)
            ptext = body[m.end():close]
            if ptext.strip():
                params = [eval_expr(p, line, col + c) for p, c in _split_params(ptext, line, m.end())]
            pos = close + 1
        rest = body[pos:]
        if name == "pauli":
            if len(params) != 1:
                raise QasmError("pauli takes exactly one angle", line, col)
            word = rest.strip()
            if not re.fullmatch(r"[IXYZ]+", word):
                raise QasmError(f"bad Pauli word {word!r}", line, col + pos)
            if word_len is not None and len(word) != word_len:
                raise QasmError(f"Pauli word length {len(word)} differs from earlier {word_len}", line, col)
            word_len = len(word)
            angle = params[0]
            if isinstance(angle, complex):
                if angle.imag != 0:
                    raise QasmError("pauli angle must be real", line, col)
                angle = angle.real
            stmts.append((PauliStmt(float(angle), word), line, col))
            continue
        spec = GATE_SPECS.get(name)
        if spec is None:
            raise QasmError(f"unknown gate {name!r}", line, col)
        qubits, qumodes = [], []
        ops = [o for o in rest.split(",")] if rest.strip() else []
        for o in ops:
            om = _OPERAND_RE.fullmatch(o)
            if om is None:
                raise QasmError(f"bad operand {o.strip()!r}", line, col + pos)
            idx = int(om.group("idx"))
            if om.group("reg") == "q":
                if qumodes:
                    raise QasmError("qubit operands must precede qumode operands", line, col)
                qubits.append(idx)
            else:
                qumodes.append(idx)
        npar, nq, nm = spec
        if len(params) != npar:
            raise QasmError(f"{name} takes {npar} parameter(s), got {len(params)}", line, col)
        if len(qubits) != nq or len(qumodes) != nm:
            raise QasmError(
                f"arity mismatch: {name} needs {nq} qubit and {nm} qumode operand(s)", line, col)
        fixed = []
        for p in params:
            if name not in COMPLEX_PARAM:
                if isinstance(p, complex):
                    if p.imag != 0:
                        raise QasmError(f"{name} parameters must be real", line, col)
                    p = p.real
                p = float(p)
            else:
                p = complex(p)
                if p.imag == 0:
                    p = float(p.real)
            fixed.append(p)
        try:
            g = GateOp(name, tuple(fixed), tuple(qubits), tuple(qumodes))
        except ValueError as e:
            raise QasmError(str(e), line, col) from None
        max_q = max([max_q] + qubits)
        max_m = max([max_m] + qumodes)
        stmts.append((g, line, col))
    nq = decl.get("qubits", max(max_q + 1, word_len or 0))
    nm = decl.get("qumodes", max_m + 1)
    prog = Program(nq, nm, [s for s, _, _ in stmts])
    for s, line, col in stmts:
        try:
            Program(nq, nm, [s]).validate()
        except QasmError as e:
            raise QasmError(e.msg, line, col) from None
    return prog


# ------------------------------------------------------------------ printer

def format_number(v):
    v = complex(v) if isinstance(v, complex) else v
    if isinstance(v, complex):
        if v.imag == 0:
            return repr(float(v.real))
        re_ = repr(float(v.real))
        im = repr(float(abs(v.imag)))
        sign = "-" if v.imag < 0 or (v.imag == 0 and math.copysign(1, v.imag) < 0) else "+"
        return f"{re_}{sign}{im}i"
    return repr(float(v))


def format_statement(s):
    if isinstance(s, PauliStmt):
        return f"pauli({format_number(s.angle)}) {s.word};"
    head = s.name
    if s.params:
        head += "(" + ", ".join(format_number(p) for p in s.params) + ")"
    ops = [f"q[{i}]" for i in s.qubits] + [f"qm[{k}]" for k in s.qumodes]
    return f"{head} {', '.join(ops)};"


def emit(prog):
    """Canonical text; ``parse(emit(p)) == p``."""
    lines = [HEADER, f"qubits {prog.nq};", f"qumodes {prog.nm};"]
    lines += [format_statement(s) for s in prog.statements]
    return "\n".join(lines) + "\n"


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def dump(prog, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit(prog))
