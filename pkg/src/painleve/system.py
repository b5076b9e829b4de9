"""Text format for autonomous polynomial second-order ODE systems.

One equation per line, ``#`` starts a comment line, and an optional
``vars x, y, z`` line fixes the variable order (otherwise variables are
taken in order of first appearance).  Expressions use ``+ - * / ^ ( )``,
integer literals, ``w`` for the square root of -3, and postfix ``'`` /
``''`` for derivatives.  Multiplication must be explicit.  Each line is
``<expr>`` or ``<expr> = <expr>``; a bare expression means ``= 0``.

The second derivatives must enter linearly with constant coefficients;
the system is solved for them so the stored form is ``x_i'' = F_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .algebra import FieldElem, ParamPoly, solve_affine
from .algebra.linalg import rank

RESERVED = {"w", "t", "vars"}


class SystemParseError(ValueError):
    """Input rejected; carries the 1-based line/column of the offending token."""

    kind = "syntax"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(f"{where}{message}")

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": self.message, "line": self.line, "column": self.col}


class NonPolynomialError(SystemParseError):
    kind = "non-polynomial"


class NonAutonomousError(SystemParseError):
    kind = "non-autonomous"


class SecondDerivativeError(SystemParseError):
    kind = "second-derivative"


class MissingEquationError(SystemParseError):
    kind = "missing-equation"


# ---------------------------------------------------------------------------
# tokens
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # INT, IDENT, OP, PRIME, EOF
    text: str
    line: int
    col: int


_OPS = set("+-*/^()=,")


def tokenize(text: str, line: int = 1) -> list[Token]:
    out: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        col = i + 1
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                raise SystemParseError("decimal literals are not allowed; write rationals as p/q", line, col)
            out.append(Token("INT", text[i:j], line, col))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(Token("IDENT", text[i:j], line, col))
            i = j
        elif ch == "'":
            j = i
            while j < n and text[j] == "'":
                j += 1
            out.append(Token("PRIME", text[i:j], line, col))
            i = j
        elif ch in _OPS:
            out.append(Token("OP", ch, line, col))
            i += 1
        else:
            raise SystemParseError(f"unexpected character {ch!r}", line, col)
    out.append(Token("EOF", "", line, n + 1))
    return out


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int
    tok: Token


@dataclass(frozen=True)
class Omega:
    tok: Token


@dataclass(frozen=True)
class Sym:
    name: str
    order: int  # number of primes
    tok: Token


@dataclass(frozen=True)
class Neg:
    operand: object
    tok: Token


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    tok: Token


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: object
    tok: Token


@dataclass(frozen=True)
class Equation:
    lhs: object
    rhs: object | None
    line: int


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> Token:
        tok = self.cur
        if tok.kind != "OP" or tok.text != op:
            raise SystemParseError(f"expected {op!r}, found {tok.text or 'end of line'!r}", tok.line, tok.col)
        return self.advance()

    def equation(self) -> Equation:
        line = self.cur.line
        lhs = self.expr()
        rhs = None
        if self.cur.kind == "OP" and self.cur.text == "=":
            self.advance()
            rhs = self.expr()
        if self.cur.kind != "EOF":
            tok = self.cur
            if tok.kind in ("IDENT", "INT") or (tok.kind == "OP" and tok.text == "("):
                raise SystemParseError("implicit multiplication is not allowed; use '*'", tok.line, tok.col)
            raise SystemParseError(f"unexpected {tok.text!r}", tok.line, tok.col)
        return Equation(lhs, rhs, line)

    def expr(self):
        node = self.term()
        while self.cur.kind == "OP" and self.cur.text in "+-":
            tok = self.advance()
            node = BinOp(tok.text, node, self.term(), tok)
        return node

    def term(self):
        node = self.unary()
        while self.cur.kind == "OP" and self.cur.text in "*/":
            tok = self.advance()
            node = BinOp(tok.text, node, self.unary(), tok)
        return node

    def unary(self):
        if self.cur.kind == "OP" and self.cur.text in "+-":
            tok = self.advance()
            operand = self.unary()
            return operand if tok.text == "+" else Neg(operand, tok)
        return self.power()

    def power(self):
        base = self.atom()
        if self.cur.kind == "OP" and self.cur.text == "^":
            tok = self.advance()
            return Pow(base, self.unary(), tok)
        return base

    def atom(self):
        tok = self.cur
        if tok.kind == "INT":
            self.advance()
            return Num(int(tok.text), tok)
        if tok.kind == "IDENT":
            self.advance()
            nxt = self.cur
            if nxt.kind == "OP" and nxt.text == "(":
                raise NonPolynomialError(f"function call {tok.text}(...) is not polynomial", tok.line, tok.col)
            order = 0
            if nxt.kind == "PRIME":
                self.advance()
                order = len(nxt.text)
            if tok.text == "w":
                if order:
                    raise SystemParseError("the constant w cannot be differentiated", tok.line, tok.col)
                return Omega(tok)
            return Sym(tok.text, order, tok)
        if tok.kind == "OP" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            if self.cur.kind == "PRIME":
                p = self.cur
                raise SystemParseError("derivatives apply to variable names only", p.line, p.col)
            return node
        if tok.kind == "PRIME":
            raise SystemParseError("derivative mark without a variable", tok.line, tok.col)
        raise SystemParseError(f"unexpected {tok.text or 'end of line'!r}", tok.line, tok.col)


def _walk(node) -> Iterator:
    yield node
    for attr in ("operand", "left", "right", "base", "exponent"):
        child = getattr(node, attr, None)
        if child is not None:
            yield from _walk(child)


# ---------------------------------------------------------------------------
# ODESystem
# ---------------------------------------------------------------------------


def deriv_name(var: str, order: int) -> str:
    return var + "'" * order


@dataclass(frozen=True, eq=False)
class ODESystem:
    """``var_i'' = rhs[i]`` with each ``rhs[i]`` polynomial in vars and first derivatives."""

    var_names: tuple[str, ...]
    rhs: tuple[ParamPoly, ...]
    _compiled: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if len(self.var_names) != len(self.rhs):
            raise ValueError("one right-hand side per variable required")
        allowed = set(self.state_vars)
        for f in self.rhs:
            extra = set(f.used_variables()) - allowed
            if extra:
                raise ValueError(f"right-hand side uses non-state symbols {sorted(extra)}")
        object.__setattr__(self, "rhs", tuple(f.extend(self.state_vars) for f in self.rhs))

    @property
    def n(self) -> int:
        return len(self.var_names)

    @property
    def state_vars(self) -> tuple[str, ...]:
        return tuple(self.var_names) + tuple(deriv_name(v, 1) for v in self.var_names)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ODESystem):
            return NotImplemented
        return self.var_names == other.var_names and all(a == b for a, b in zip(self.rhs, other.rhs))

    def __hash__(self) -> int:
        return hash((self.var_names, self.rhs))

    def evaluate(self, q: Sequence, qd: Sequence) -> list[FieldElem]:
        values = dict(zip(self.state_vars, list(q) + list(qd)))
        return [f.evaluate(values) for f in self.rhs]

    def numeric_rhs(self) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        """Vectorised complex evaluation of ``F`` (inputs shape ``(n, ...)``)."""
        if not self._compiled:
            for f in self.rhs:
                coeffs = np.array([c.to_complex() for _, c in f.terms.items()], dtype=complex)
                exps = np.array([m for m in f.terms], dtype=int).reshape(len(f.terms), 2 * self.n)
                self._compiled.append((coeffs, exps))
        compiled = self._compiled

        def rhs(q: np.ndarray, qd: np.ndarray) -> np.ndarray:
            state = np.concatenate([np.asarray(q), np.asarray(qd)], axis=0)
            out = np.zeros((self.n,) + state.shape[1:], dtype=complex)
            for i, (coeffs, exps) in enumerate(compiled):
                for c, e in zip(coeffs, exps):
                    term = c
                    for k in np.nonzero(e)[0]:
                        term = term * state[k] ** e[k]
                    out[i] = out[i] + term
            return out

        return rhs


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _lower(node, variables: tuple[str, ...], index: dict[str, int], ring: tuple[str, ...]) -> ParamPoly:
    if isinstance(node, Num):
        return ParamPoly.constant(node.value, ring)
    if isinstance(node, Omega):
        return ParamPoly.constant(FieldElem(0, 1), ring)
    if isinstance(node, Sym):
        return ParamPoly.var(deriv_name(node.name, node.order), ring)
    if isinstance(node, Neg):
        return -_lower(node.operand, variables, index, ring)
    if isinstance(node, BinOp):
        a = _lower(node.left, variables, index, ring)
        b = _lower(node.right, variables, index, ring)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if not b.is_constant():
            raise NonPolynomialError("division by a non-constant expression", node.tok.line, node.tok.col)
        c = b.constant_term()
        if not c:
            raise SystemParseError("division by zero", node.tok.line, node.tok.col)
        return a.scale(c.inverse())
    if isinstance(node, Pow):
        e = node.exponent
        if not isinstance(e, Num):
            raise NonPolynomialError("exponent must be a non-negative integer literal", node.tok.line, node.tok.col)
        return _lower(node.base, variables, index, ring) ** e.value
    raise TypeError(node)


def parse_system(src: str) -> ODESystem:
    """Parse system text into normalised explicit form ``x_i'' = F_i``."""
    declared: list[str] | None = None
    equations: list[Equation] = []
    for lineno, raw in enumerate(src.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        toks = tokenize(raw, lineno)
        if toks[0].kind == "IDENT" and toks[0].text == "vars":
            if declared is not None:
                raise SystemParseError("duplicate 'vars' declaration", lineno, toks[0].col)
            declared = []
            p = _Parser(toks)
            p.advance()
            while True:
                tok = p.cur
                if tok.kind != "IDENT" or tok.text in RESERVED:
                    raise SystemParseError("expected a variable name", tok.line, tok.col)
                if tok.text in declared:
                    raise SystemParseError(f"variable {tok.text!r} declared twice", tok.line, tok.col)
                declared.append(tok.text)
                p.advance()
                if p.cur.kind == "EOF":
                    break
                p.expect_op(",")
            continue
        equations.append(_Parser(toks).equation())

    if not equations:
        raise SystemParseError("no equations found", 1, 1)

    seen: list[str] = []
    for eq in equations:
        for side in (eq.lhs, eq.rhs):
            if side is None:
                continue
            for node in _walk(side):
                if isinstance(node, Sym):
                    if node.name == "t":
                        raise NonAutonomousError(
                            "the independent variable t may not appear (system must be autonomous)",
                            node.tok.line,
                            node.tok.col,
                        )
                    if node.order > 2:
                        raise SystemParseError(
                            f"derivative of order {node.order} exceeds second order", node.tok.line, node.tok.col
                        )
                    if declared is not None and node.name not in declared:
                        raise SystemParseError(f"undeclared symbol {node.name!r}", node.tok.line, node.tok.col)
                    if node.name not in seen:
                        seen.append(node.name)
    variables = tuple(declared) if declared is not None else tuple(seen)
    index = {v: i for i, v in enumerate(variables)}
    second = tuple(deriv_name(v, 2) for v in variables)
    ring = tuple(variables) + tuple(deriv_name(v, 1) for v in variables) + second

    polys = []
    for eq in equations:
        p = _lower(eq.lhs, variables, index, ring)
        if eq.rhs is not None:
            p = p - _lower(eq.rhs, variables, index, ring)
        polys.append((p, eq.line))

    # split each equation into K @ q'' + G(q, q')
    k_rows, g_parts = [], []
    for p, line in polys:
        row = []
        for name in second:
            d = p.diff(name)
            if not d.is_constant():
                raise SecondDerivativeError(f"{name} appears nonlinearly or with a non-constant coefficient", line, 1)
            row.append(d.constant_term())
        g = ParamPoly(ring, {m: c for m, c in p.terms.items() if not any(m[2 * len(variables):])})
        k_rows.append(row)
        g_parts.append(g)

    for j, v in enumerate(variables):
        if all(not row[j] for row in k_rows):
            raise MissingEquationError(f"no equation determines {deriv_name(v, 2)}", equations[-1].line, 1)
    if len(polys) != len(variables):
        raise MissingEquationError(
            f"{len(polys)} equations for {len(variables)} variables {list(variables)}", equations[-1].line, 1
        )
    if rank(k_rows) < len(variables):
        raise SecondDerivativeError("second derivatives cannot be solved for (singular coefficient matrix)", equations[0].line, 1)

    zero = ParamPoly.zero(ring)
    sol, obstruction = solve_affine(k_rows, [-g for g in g_parts], zero)
    assert not any(obstruction)
    state = tuple(variables) + tuple(deriv_name(v, 1) for v in variables)
    return ODESystem(variables, tuple(_restrict(f, state) for f in sol))


def _restrict(p: ParamPoly, variables: tuple[str, ...]) -> ParamPoly:
    """Drop ring variables that do not occur (second derivatives here)."""
    return ParamPoly(
        variables,
        {tuple(dict(zip(p.variables, m)).get(v, 0) for v in variables): c for m, c in p.terms.items()},
    )


def parse_poly(text: str, variables: Sequence[str] | None = None) -> ParamPoly:
    """Parse a single polynomial expression in arbitrary symbols.

    Primed names are kept as distinct symbols (``x'`` is its own variable).
    """
    toks = tokenize(text)
    p = _Parser(toks)
    node = p.expr()
    if p.cur.kind != "EOF":
        raise SystemParseError(f"unexpected {p.cur.text!r}", p.cur.line, p.cur.col)
    names: list[str] = list(variables or ())
    for n in _walk(node):
        if isinstance(n, Sym):
            name = deriv_name(n.name, n.order)
            if name not in names:
                if variables is not None:
                    raise SystemParseError(f"unknown symbol {name!r}", n.tok.line, n.tok.col)
                names.append(name)
    ring = tuple(names)
    return _lower(node, ring, {}, ring)


def serialize_system(sys: ODESystem) -> str:
    """Canonical text: a ``vars`` line then ``x'' = F`` lines in graded-lex order."""
    lines = ["vars " + ", ".join(sys.var_names)]
    for v, f in zip(sys.var_names, sys.rhs):
        lines.append(f"{deriv_name(v, 2)} = {f.to_text()}")
    return "\n".join(lines) + "\n"


BUILTIN_SYSTEM_TEXT = """\
# three coupled second-order equations with a closed-form solution
vars x, y, z
x'' + 3*(x*x' + y*z' + z*y') + x^3 + y^3 + z^3 + 6*x*y*z = 0
y'' + 3*(x*y' + y*x' + z*z') + 3*(x^2*y + y^2*z + z^2*x) = 0
z'' + 3*(x*z' + y*y' + z*x') + 3*(x*y^2 + y*z^2 + z*x^2) = 0
"""


def builtin_system() -> ODESystem:
    """The built-in three-variable fixture system."""
    return parse_system(BUILTIN_SYSTEM_TEXT)


def read_system(path) -> ODESystem:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())
