"""Text syntax for scalars, operators, systems, solutions and problem files.

A problem file looks like::

    vars x, y;
    params c;
    let r = x + y;
    ops X1 = Dx, X2 = Dy, X3 = Dx + Dy;
    system { X1(u1) = u1 + 2*u2 + u3; ... }

with exactly one of ``system { }``, ``equation { }`` or ``firstorder { }``
and optional ``coords { }`` and ``config { }`` blocks. ``#`` starts a comment.
Operators are sums of monomials ``coef*Dx^i*Dy^j``; a coefficient written
after a derivative, or a product of two sums, would be a composition and is
rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError
from .expr import LogForm, VarSpec
from .expr.solution import SolutionExpr

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<name>[^\W\d]\w*)
  | (?P<op>[-+*/^(){};,=:'])
    """,
    re.VERBOSE,
)

KEYWORDS = {"vars", "params", "let", "ops", "system", "equation", "firstorder", "coords", "config", "unknowns"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - start + 1))
    return tokens


# -- expression AST -----------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int
    tok: Token


@dataclass(frozen=True)
class Name:
    id: str
    tok: Token


@dataclass(frozen=True)
class Call:
    name: str
    primes: int
    args: tuple
    tok: Token


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    tok: Token


@dataclass(frozen=True)
class Neg:
    arg: object
    tok: Token


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int
    tok: Token


def _err(tok, msg):
    return ParseError(msg, tok.line, tok.col)


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text):
        return self.tok.text == text and self.tok.kind in ("op", "name")

    def expect(self, text):
        if not self.at(text):
            raise _err(self.tok, f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def expect_name(self):
        if self.tok.kind != "name":
            raise _err(self.tok, f"expected a name, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def expect_int(self):
        neg = False
        if self.at("-"):
            self.next()
            neg = True
        if self.tok.kind != "num":
            raise _err(self.tok, "expected an integer")
        v = int(self.next().text)
        return -v if neg else v

    # expr := term (('+'|'-') term)*
    def expr(self):
        left = self.term()
        while self.at("+") or self.at("-"):
            t = self.next()
            left = BinOp(t.text, left, self.term(), t)
        return left

    def term(self):
        left = self.unary()
        while self.at("*") or self.at("/"):
            t = self.next()
            left = BinOp(t.text, left, self.unary(), t)
        return left

    def unary(self):
        if self.at("-"):
            t = self.next()
            return Neg(self.unary(), t)
        if self.at("+"):
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.at("^"):
            t = self.next()
            if self.at("("):
                self.next()
                e = self.expect_int()
                self.expect(")")
            else:
                e = self.expect_int()
            return Pow(base, e, t)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.next()
            return Num(int(t.text), t)
        if t.kind == "name":
            self.next()
            primes = 0
            while self.at("'"):
                self.next()
                primes += 1
            if self.at("("):
                self.next()
                args = [self.expr()]
                while self.at(","):
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                return Call(t.text, primes, tuple(args), t)
            if primes:
                raise _err(t, "derivative marks must be followed by an argument list")
            return Name(t.text, t)
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        raise _err(t, f"unexpected {t.text or 'end of input'!r}")

    def done(self):
        if self.tok.kind != "eof":
            raise _err(self.tok, f"unexpected trailing {self.tok.text!r}")


def _parse_expr(text):
    p = _Parser(text)
    e = p.expr()
    p.done()
    return e


# -- evaluation into the various domains -------------------------------------


class _Env:
    def __init__(self, space, lets=None):
        self.space = space
        self.lets = dict(lets or {})

    def name(self, node):
        if node.id in self.space.names:
            return self.space.symbol(node.id)
        if node.id in self.lets:
            return self.lets[node.id]
        raise _err(node.tok, f"undeclared name {node.id!r}")


def _scalar(node, env):
    sp = env.space
    if isinstance(node, Num):
        return sp(node.value)
    if isinstance(node, Name):
        return env.name(node)
    if isinstance(node, Neg):
        return -_scalar(node.arg, env)
    if isinstance(node, Pow):
        b = _scalar(node.base, env)
        if node.exp < 0 and b.is_zero:
            raise _err(node.tok, "negative power of zero")
        return b**node.exp
    if isinstance(node, BinOp):
        a, b = _scalar(node.left, env), _scalar(node.right, env)
        if node.op == "/":
            if b.is_zero:
                raise _err(node.tok, "division by zero")
            return a / b
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        return a * b
    if isinstance(node, Call):
        raise _err(node.tok, f"non-rational coefficient: function {node.name!r} is not allowed here")
    raise TypeError(node)


def _logform(node, env):
    if isinstance(node, Call) and node.name == "ln" and not node.primes:
        if len(node.args) != 1:
            raise _err(node.tok, "ln takes one argument")
        arg = _scalar(node.args[0], env)
        if arg.is_zero:
            raise _err(node.tok, "logarithm of zero")
        return LogForm.log(arg)
    if isinstance(node, BinOp) and node.op in "+-":
        a, b = _logform(node.left, env), _logform(node.right, env)
        return a + b if node.op == "+" else a - b
    if isinstance(node, Neg):
        return -_logform(node.arg, env)
    if isinstance(node, BinOp) and node.op in "*/":
        a, b = _logform(node.left, env), _logform(node.right, env)
        if node.op == "/":
            if not b.is_scalar or not b.rational.is_constant:
                raise _err(node.tok, "logarithmic terms may only be divided by constants")
            return a.scale(1 / b.rational)
        if a.is_scalar and (a.rational.is_constant or b.is_scalar):
            return b.scale(a.rational) if not b.is_scalar else LogForm(a.rational * b.rational)
        if b.is_scalar and b.rational.is_constant:
            return a.scale(b.rational)
        raise _err(node.tok, "logarithms may only be multiplied by constants")
    return LogForm(_scalar(node, env))


def _dname(name, space):
    if name.startswith("D") and name[1:] in space.variables:
        return name[1:]
    return None


def _operator(node, env):
    """Evaluate to ``(coeffs, kind)``; kind is 'scalar', 'mono' (pure D power) or 'op'."""
    sp = env.space
    if isinstance(node, Name):
        v = _dname(node.id, sp)
        if v is not None:
            key = (1, 0) if v == sp.first else (0, 1)
            return {key: sp.one}, "mono"
        return {(0, 0): env.name(node)}, "scalar"
    if isinstance(node, Num):
        return {(0, 0): sp(node.value)}, "scalar"
    if isinstance(node, Neg):
        c, kind = _operator(node.arg, env)
        return {k: -v for k, v in c.items()}, "scalar" if kind == "scalar" else "op"
    if isinstance(node, Pow):
        c, kind = _operator(node.base, env)
        if kind == "scalar":
            return {(0, 0): _scalar(node, env)}, "scalar"
        if kind == "mono" and node.exp >= 0:
            ((i, j),) = c
            return {(i * node.exp, j * node.exp): sp.one}, "mono"
        raise _err(node.tok, "only derivative monomials may be raised to a power")
    if isinstance(node, BinOp):
        a, ka = _operator(node.left, env)
        b, kb = _operator(node.right, env)
        if node.op in "+-":
            out = dict(a)
            for k, v in b.items():
                v = v if node.op == "+" else -v
                out[k] = out[k] + v if k in out else v
            return out, "scalar" if ka == kb == "scalar" else "op"
        if node.op == "/":
            if kb != "scalar":
                raise _err(node.tok, "cannot divide by an operator")
            d = b[(0, 0)] if (0, 0) in b else sp.zero
            if d.is_zero:
                raise _err(node.tok, "division by zero")
            return {k: v / d for k, v in a.items()}, "scalar" if ka == "scalar" else "op"
        if ka == "scalar":
            s = a.get((0, 0), sp.zero)
            return {k: s * v for k, v in b.items()}, kb if kb != "mono" or s == 1 else "op"
        if kb == "mono" and len(a) == 1:
            ((i1, j1), c1), ((i2, j2),) = next(iter(a.items())), b
            return {(i1 + i2, j1 + j2): c1}, "mono" if ka == "mono" else "op"
        raise _err(node.tok, "operator composition is not allowed; write the operator as a sum of coef*Dx^i*Dy^j terms")
    if isinstance(node, Call):
        raise _err(node.tok, f"unexpected call {node.name!r} in an operator")
    raise TypeError(node)


def _char_operator(node, env):
    from .lpdo import CharOperator

    coeffs, _ = _operator(node, env)
    if any(i + j != 1 for i, j in coeffs):
        raise _err(getattr(node, "tok", None) or Token("op", "", 0, 0), "characteristic operators must be m*Dx + n*Dy")
    sp = env.space
    m, n = coeffs.get((1, 0), sp.zero), coeffs.get((0, 1), sp.zero)
    if m.is_zero and n.is_zero:
        raise _err(node.tok, "zero characteristic operator")
    return CharOperator(m, n)


def _linear(node, env, unknowns, derivs=False):
    """Evaluate to ``{key: Scalar}`` linear in the unknowns.

    Keys are ``None`` for the unknown-free part, ``u`` for an unknown, or
    ``(u, v)`` for the derivative of ``u`` by the variable ``v`` when
    ``derivs`` is set.
    """
    sp = env.space
    if isinstance(node, Name) and node.id in unknowns:
        return {node.id: sp.one}
    if isinstance(node, Call) and derivs and not node.primes and _dname(node.name, sp) is not None:
        if len(node.args) != 1 or not isinstance(node.args[0], Name) or node.args[0].id not in unknowns:
            raise _err(node.tok, f"{node.name} must be applied to a single unknown")
        return {(node.args[0].id, _dname(node.name, sp)): sp.one}
    if isinstance(node, Neg):
        return {k: -v for k, v in _linear(node.arg, env, unknowns, derivs).items()}
    if isinstance(node, BinOp):
        a = _linear(node.left, env, unknowns, derivs)
        if node.op in "+-":
            b = _linear(node.right, env, unknowns, derivs)
            out = dict(a)
            for k, v in b.items():
                v = v if node.op == "+" else -v
                out[k] = out[k] + v if k in out else v
            return out
        if node.op == "/":
            d = _scalar(node.right, env)
            if d.is_zero:
                raise _err(node.tok, "division by zero")
            return {k: v / d for k, v in a.items()}
        b = _linear(node.right, env, unknowns, derivs)
        if set(a) == {None}:
            return {k: a[None] * v for k, v in b.items()}
        if set(b) == {None}:
            return {k: b[None] * v for k, v in a.items()}
        raise _err(node.tok, "equation is not linear in the unknowns")
    if isinstance(node, Pow) and not _mentions(node, unknowns):
        return {None: _scalar(node, env)}
    if isinstance(node, Call) and node.name in env.space.names:
        raise _err(node.tok, f"{node.name!r} is not an operator")
    if isinstance(node, Call) and node.name in unknowns:
        raise _err(node.tok, f"unknown {node.name!r} cannot be called")
    if isinstance(node, Call) and derivs and _dname(node.name, sp) is None and not node.name.startswith("D"):
        raise _err(node.tok, f"undeclared operator {node.name!r}")
    return {None: _scalar(node, env)}


def _mentions(node, names):
    if isinstance(node, Name):
        return node.id in names
    if isinstance(node, (Num,)):
        return False
    if isinstance(node, Neg):
        return _mentions(node.arg, names)
    if isinstance(node, Pow):
        return _mentions(node.base, names)
    if isinstance(node, BinOp):
        return _mentions(node.left, names) or _mentions(node.right, names)
    if isinstance(node, Call):
        return any(_mentions(a, names) for a in node.args)
    return False


def _solution(node, env):
    sp = env.space
    if isinstance(node, Call):
        if node.name == "exp" and not node.primes:
            if len(node.args) != 1:
                raise _err(node.tok, "exp takes one argument")
            return SolutionExpr.exp(_logform(node.args[0], env))
        if node.name == "int" and not node.primes:
            if len(node.args) != 2:
                raise _err(node.tok, "int takes an integrand and a direction")
            op = _char_operator(node.args[1], env)
            if not op.is_constant:
                raise _err(node.tok, "integration directions must have constant coefficients")
            return SolutionExpr.integral(_solution(node.args[0], env), (op.m.as_fraction(), op.n.as_fraction()))
        if node.name in sp.names or node.name in ("ln",) or node.name in env.lets:
            raise _err(node.tok, f"{node.name!r} cannot be called")
        if len(node.args) != 1:
            raise _err(node.tok, "arbitrary functions take one argument")
        return SolutionExpr.func(node.name, _logform(node.args[0], env), node.primes)
    if isinstance(node, Neg):
        return -_solution(node.arg, env)
    if isinstance(node, Pow):
        return _solution(node.base, env) ** node.exp
    if isinstance(node, BinOp):
        if node.op == "/":
            d = _scalar(node.right, env)
            if d.is_zero:
                raise _err(node.tok, "division by zero")
            return _solution(node.left, env) * (1 / d)
        a, b = _solution(node.left, env), _solution(node.right, env)
        return {"+": a + b, "-": a - b, "*": a * b}[node.op]
    return SolutionExpr.const(_scalar(node, env))


# -- public single-item parsers ----------------------------------------------


def parse_scalar(text, space, lets=None):
    return _scalar(_parse_expr(text), _Env(space, lets))


def parse_logform(text, space, lets=None):
    return _logform(_parse_expr(text), _Env(space, lets))


def parse_operator(text, space, lets=None):
    from .lpdo import LPDO

    coeffs, _ = _operator(_parse_expr(text), _Env(space, lets))
    return LPDO(space, coeffs)


def parse_char_operator(text, space, lets=None):
    return _char_operator(_parse_expr(text), _Env(space, lets))


def parse_solution(text, space, lets=None):
    return _solution(_parse_expr(text), _Env(space, lets))


# -- problem files ----------------------------------------------------------


@dataclass
class FirstOrderProblem:
    """``v_1 = a*v_2 + b*v`` (subscripts: derivatives by the two variables)."""

    unknowns: tuple
    a: list
    b: list


@dataclass
class ProblemFile:
    space: VarSpec
    kind: str
    problem: object
    coords: tuple | None = None
    config: dict = field(default_factory=dict)
    lets: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)


def _split_statements(p, end="}"):
    """Yield token slices of statements separated by ';' until ``end``."""
    stmts, cur = [], []
    depth = 0
    while True:
        t = p.tok
        if t.kind == "eof":
            raise _err(t, f"missing {end!r}")
        if t.text == end and t.kind == "op" and depth == 0:
            p.next()
            if cur:
                stmts.append(cur)
            return stmts
        p.next()
        if t.text == "(" and t.kind == "op":
            depth += 1
        elif t.text == ")" and t.kind == "op":
            depth -= 1
        if t.text == ";" and t.kind == "op" and depth == 0:
            if cur:
                stmts.append(cur)
            cur = []
        else:
            cur.append(t)


def _sub_parser(tokens):
    p = _Parser("")
    last = tokens[-1] if tokens else Token("eof", "", 0, 0)
    p.toks = list(tokens) + [Token("eof", "", last.line, last.col + len(last.text))]
    return p


def _split_eq(tokens):
    idx = [k for k, t in enumerate(tokens) if t.text == "=" and t.kind == "op"]
    if len(idx) != 1:
        where = tokens[0] if tokens else Token("eof", "", 0, 0)
        raise _err(where, "expected exactly one '=' in the statement")
    k = idx[0]
    if k == 0 or k == len(tokens) - 1:
        raise _err(tokens[k], "empty side of '='")
    return tokens[:k], tokens[k + 1 :]


def _expr_of(tokens):
    p = _sub_parser(tokens)
    e = p.expr()
    p.done()
    return e


def _name_list(p):
    names = [p.expect_name()]
    while p.at(","):
        p.next()
        names.append(p.expect_name())
    p.expect(";")
    return names


def parse_problem(text):
    """Parse a problem file into a :class:`ProblemFile`."""

    p = _Parser(text)
    space = None
    params = []
    lets = {}
    ops = {}
    unknown_decl = None
    kind = problem = coords = None
    config = {}
    positions = {}
    notes = []

    def need_space(tok):
        if space is None:
            raise _err(tok, "'vars' must come first")
        return space

    while p.tok.kind != "eof":
        t = p.expect_name()
        word = t.text
        if word == "vars":
            if space is not None:
                raise _err(t, "duplicate 'vars' declaration")
            names = _name_list(p)
            if len(names) != 2:
                raise _err(t, "exactly two independent variables are required")
            vnames = [n.text for n in names]
            space = VarSpec(vnames[0], vnames[1], params)
        elif word == "params":
            names = [n.text for n in _name_list(p)]
            sp = need_space(t)
            if ops or lets:
                raise _err(t, "'params' must precede 'let' and 'ops'")
            try:
                space = VarSpec(sp.first, sp.second, tuple(sp.params) + tuple(names))
            except ValueError as exc:
                raise _err(t, str(exc)) from None
        elif word == "let":
            sp = need_space(t)
            nt = p.expect_name()
            if nt.text in sp.names or nt.text in lets:
                raise _err(nt, f"name {nt.text!r} already defined")
            p.expect("=")
            stmt = _split_until_semicolon(p)
            lets[nt.text] = _scalar(_expr_of(stmt), _Env(sp, lets))
        elif word == "unknowns":
            unknown_decl = [n.text for n in _name_list(p)]
        elif word == "ops":
            sp = need_space(t)
            while True:
                nt = p.expect_name()
                p.expect("=")
                toks = []
                depth = 0
                while not ((p.at(",") or p.at(";")) and depth == 0):
                    if p.tok.kind == "eof":
                        raise _err(p.tok, "unterminated 'ops' declaration")
                    if p.at("("):
                        depth += 1
                    elif p.at(")"):
                        depth -= 1
                    toks.append(p.next())
                if not toks:
                    raise _err(nt, "empty operator definition")
                ops[nt.text] = _char_operator(_expr_of(toks), _Env(sp, lets))
                positions[f"op:{nt.text}"] = (nt.line, nt.col)
                if p.at(";"):
                    p.next()
                    break
                p.next()
        elif word in ("system", "equation", "firstorder"):
            sp = need_space(t)
            if kind is not None:
                raise _err(t, "exactly one problem block is allowed")
            kind = word
            positions["problem"] = (t.line, t.col)
            p.expect("{")
            stmts = _split_statements(p)
            if word == "system":
                problem = _system_block(stmts, sp, lets, ops, t)
            elif word == "equation":
                if len(stmts) != 1:
                    raise _err(t, "an equation block holds one operator")
                toks = stmts[0]
                eqs = [k for k, x in enumerate(toks) if x.text == "="]
                if eqs:
                    lhs, rhs = _split_eq(toks)
                    if not (len(rhs) == 1 and rhs[0].text == "0"):
                        raise _err(rhs[0], "write the equation as 'L = 0' or just 'L'")
                    toks = lhs
                from .lpdo import LPDO

                coeffs, _ = _operator(_expr_of(toks), _Env(sp, lets))
                problem = LPDO(sp, coeffs)
                if problem.order < 1:
                    raise _err(t, "equation operator must have order at least 1")
            else:
                problem = _firstorder_block(stmts, sp, lets, unknown_decl, t)
        elif word == "coords":
            sp = need_space(t)
            p.expect("{")
            stmts = _split_statements(p)
            if len(stmts) != 2:
                raise _err(t, "coords needs exactly two definitions")
            pair = []
            for st in stmts:
                lhs, rhs = _split_eq(st)
                if len(lhs) != 1 or lhs[0].kind != "name":
                    raise _err(lhs[0], "expected 'name = expression'")
                pair.append((lhs[0].text, _logform(_expr_of(rhs), _Env(sp, lets))))
            coords = tuple(pair)
        elif word == "config":
            p.expect("{")
            for st in _split_statements(p):
                lhs, rhs = _split_eq(st)
                if len(lhs) != 1:
                    raise _err(lhs[0], "expected 'key = value'")
                config[lhs[0].text.replace("-", "_")] = "".join(x.text for x in rhs)
        else:
            raise _err(t, f"unknown statement {word!r}")
    if space is None:
        raise ParseError("missing 'vars' declaration", 1, 1)
    if kind is None:
        raise ParseError("no problem block (system, equation or firstorder)", p.tok.line, p.tok.col)
    return ProblemFile(space, kind, problem, coords, config, lets, positions, notes)


def _split_until_semicolon(p):
    toks = []
    while not p.at(";"):
        if p.tok.kind == "eof":
            raise _err(p.tok, "missing ';'")
        toks.append(p.next())
    p.next()
    if not toks:
        raise _err(p.tok, "empty definition")
    return toks


def _system_block(stmts, space, lets, ops, block_tok):
    from .charform import CharSystem

    env = _Env(space, lets)
    heads = []
    for st in stmts:
        lhs, rhs = _split_eq(st)
        node = _expr_of(lhs)
        if not (isinstance(node, Call) and len(node.args) == 1 and isinstance(node.args[0], Name)):
            raise _err(lhs[0], "left side must be Op(unknown)")
        if node.name in ops:
            op, name = ops[node.name], node.name
        elif _dname(node.name, space) is not None:
            op, name = _char_operator(Name(node.name, node.tok), env), None
        else:
            raise _err(node.tok, f"undeclared operator {node.name!r}")
        u = node.args[0].id
        if u in space.names or u in lets:
            raise _err(node.args[0].tok, f"{u!r} is a variable or parameter, not an unknown")
        if u in [h[1] for h in heads]:
            raise _err(node.args[0].tok, f"unknown {u!r} has two equations")
        heads.append((op, u, rhs, name))
    labels = [h[1] for h in heads]
    n = len(labels)
    if n < 2:
        raise _err(block_tok, "a characteristic system needs at least two equations")
    alpha = []
    for op, u, rhs, _ in heads:
        lin = _linear(_expr_of(rhs), env, set(labels))
        if None in lin and not lin[None].is_zero:
            raise _err(rhs[0], "right side must be a linear combination of the unknowns")
        alpha.append([lin.get(v, space.zero) for v in labels])
    # bare derivative heads such as Dx(u1) get a fresh Xi name
    taken = {h[3] for h in heads}
    names = []
    for i, h in enumerate(heads):
        name = h[3]
        if name is None:
            name = f"X{i + 1}"
            while name in taken:
                name += "_"
            taken.add(name)
        names.append(name)
    return CharSystem([h[0] for h in heads], alpha, labels, names=names)


def _firstorder_block(stmts, space, lets, declared, block_tok):
    from . import linalg

    env = _Env(space, lets)
    parsed = []
    found = []
    for st in stmts:
        lhs, rhs = _split_eq(st)
        parsed.append((_expr_of(lhs), _expr_of(rhs), lhs[0]))
    if declared is None:
        for lhs, rhs, _ in parsed:
            for node in (lhs, rhs):
                for u in _called_unknowns(node, space):
                    if u not in found:
                        found.append(u)
        unknowns = found
    else:
        unknowns = list(declared)
    n = len(unknowns)
    if n == 0:
        raise _err(block_tok, "no unknowns found")
    if len(parsed) != n:
        raise _err(block_tok, f"{len(parsed)} equations for {n} unknowns")
    A, B, C = [], [], []
    for lhs, rhs, tok in parsed:
        left = _linear(lhs, env, set(unknowns), derivs=True)
        right = _linear(rhs, env, set(unknowns), derivs=True)
        row = dict(left)
        for k, v in right.items():
            row[k] = row[k] - v if k in row else -v
        if None in row and not row[None].is_zero:
            raise _err(tok, "first-order equations must be homogeneous in the unknowns")
        A.append([row.get((u, space.first), space.zero) for u in unknowns])
        B.append([row.get((u, space.second), space.zero) for u in unknowns])
        C.append([row.get(u, space.zero) for u in unknowns])
    if linalg.rank(A) < n:
        raise _err(
            block_tok,
            f"system is not solvable for first-variable derivatives (the D{space.first}-coefficient matrix is singular); "
            "it cannot be put into the standard form v_1 = a*v_2 + b*v",
        )
    Ainv = linalg.inverse(A)
    a = [[-v for v in row] for row in linalg.matmul(Ainv, B)]
    b = [[-v for v in row] for row in linalg.matmul(Ainv, C)]
    return FirstOrderProblem(tuple(unknowns), a, b)


def _called_unknowns(node, space):
    if isinstance(node, Call):
        if _dname(node.name, space) is not None:
            for a in node.args:
                if isinstance(a, Name) and a.id not in space.names:
                    yield a.id
        for a in node.args:
            yield from _called_unknowns(a, space)
    elif isinstance(node, BinOp):
        yield from _called_unknowns(node.left, space)
        yield from _called_unknowns(node.right, space)
    elif isinstance(node, (Neg,)):
        yield from _called_unknowns(node.arg, space)
    elif isinstance(node, Pow):
        yield from _called_unknowns(node.base, space)


def format_header(space, lets=None):
    lines = [f"vars {space.first}, {space.second};"]
    if space.params:
        lines.append(f"params {', '.join(space.params)};")
    return lines
