"""Generalized Laplace transformation of n x n characteristic systems.

For a pivot ``(i, k)`` with ``alpha[i][k] != 0`` the unknown ``u_k`` is
eliminated through equation ``i``, the unknowns are shifted to
``ubar_j = u_j + rho_j u_i`` and a new unknown

    ubar_k = (X_k u_i - sum_{s != k} beta[i][s] ubar_s) / alpha[i][k]

is introduced. The result is again a characteristic system with ``X_k`` acting
on ``u_i`` and ``X_i`` acting on ``ubar_k``.

Every transformation is certified: both equation sets are reduced to a normal
form on the jets of the other system's solutions and must vanish exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import linalg
from .charform import CharSystem, SubstitutionRecord
from .errors import CertificationError, DependentOperatorsError, TransformUndefinedError
from .lpdo import LPDO, CharOperator, commutator_decompose, compose, decompose


@dataclass(frozen=True)
class PivotChoice:
    """Equation ``i`` eliminates unknown ``k`` (both 1-based, as printed)."""

    i: int
    k: int

    def __post_init__(self):
        if self.i == self.k:
            raise ValueError("pivot needs i != k")
        if self.i < 1 or self.k < 1:
            raise ValueError("pivot indices are 1-based")

    @property
    def row(self):
        return self.i - 1

    @property
    def col(self):
        return self.k - 1

    def __str__(self):
        return f"{self.i}:{self.k}"


def pivots_of(S):
    """All admissible pivots, widest coupling ``|i - k|`` first, then by ``(i, k)``."""
    found = [
        PivotChoice(i + 1, k + 1)
        for i in range(S.n)
        for k in range(S.n)
        if i != k and not S.alpha[i][k].is_zero
    ]
    return sorted(found, key=lambda p: (-abs(p.i - p.k), p.i, p.k))


# -- jet normal form ---------------------------------------------------------------


def _transversal(X):
    sp = X.space
    if not X.m.is_zero:
        return CharOperator(sp.zero, sp.one)
    return CharOperator(sp.one, sp.zero)


class JetReducer:
    """Normal form of linear differential expressions on solutions of a system.

    For each unknown ``u_l`` the derivatives along ``X_l`` are fixed by the
    system, so every expression reduces to ``sum c * Y_l^a u_l`` with a
    constant transversal ``Y_l``. Two expressions agree on all solutions iff
    their normal forms are equal.
    """

    def __init__(self, S):
        self.system = S
        self.index = {l: t for t, l in enumerate(S.labels)}
        self._X = [X.to_lpdo() for X in S.ops]
        self._Y = [_transversal(X).to_lpdo() for X in S.ops]
        self._words = {}

    def _word(self, t, a, b):
        """``Y_t^a X_t^b`` as an LPDO."""
        key = (t, a, b)
        if key not in self._words:
            sp = self.system.space
            op = LPDO.one(sp)
            for _ in range(a):
                op = compose(op, self._Y[t])
            for _ in range(b):
                op = compose(op, self._X[t])
            self._words[key] = op
        return self._words[key]

    def _ordered(self, t, L):
        """``L = sum c_ab Y^a X^b`` with ``X`` on the right."""
        out = {}
        rest = L
        for s in range(L.order, -1, -1):
            if rest.is_zero:
                break
            words = [(s - b, b) for b in range(s + 1)]
            syms = [[self._word(t, a, b).coeff(s - r, r) for r in range(s + 1)] for a, b in words]
            mat = [[syms[c][r] for c in range(len(words))] for r in range(s + 1)]
            rhs = [rest.coeff(s - r, r) for r in range(s + 1)]
            if all(v.is_zero for v in rhs):
                continue
            coeffs = linalg.solve(mat, rhs)
            for (a, b), c in zip(words, coeffs):
                if not c.is_zero:
                    out[(a, b)] = c
                    rest = rest - LPDO.scalar(c, L.space) * self._word(t, a, b)
        if not rest.is_zero:
            raise CertificationError("ordered decomposition left a residual")
        return out

    def reduce(self, expr):
        """Normal form of ``{label: LPDO}`` as ``{(label, a): Scalar}``."""
        S = self.system
        sp = S.space
        pending = {l: L for l, L in expr.items() if not L.is_zero}
        out = {}
        while pending:
            label = max(pending, key=lambda l: (pending[l].order, l))
            L = pending.pop(label)
            t = self.index[label]
            for (a, b), c in self._ordered(t, L).items():
                if b == 0:
                    key = (label, a)
                    out[key] = out.get(key, sp.zero) + c
                    continue
                op = LPDO.scalar(c, sp) * self._word(t, a, b - 1)
                for q, other in enumerate(S.labels):
                    coef = S.alpha[t][q]
                    if coef.is_zero:
                        continue
                    term = compose(op, LPDO.scalar(coef, sp))
                    pending[other] = pending[other] + term if other in pending else term
                    if pending[other].is_zero:
                        del pending[other]
        return {k: v for k, v in out.items() if not v.is_zero}


def _substitute(expr, mapping):
    """``{label: L}`` with each label replaced by its ``{source: M}`` expression."""
    out = {}
    for label, L in expr.items():
        for src, M in mapping[label].items():
            c = compose(L, M)
            out[src] = out[src] + c if src in out else c
    return {k: v for k, v in out.items() if not v.is_zero}


def certify_transform(old, new, record):
    """Check that ``record`` maps solutions of ``old`` onto solutions of ``new`` and back."""
    fwd = JetReducer(old)
    for t, eq in enumerate(new.equations()):
        nf = fwd.reduce(_substitute(eq, record.forward))
        if nf:
            raise CertificationError(f"new equation {t + 1} does not follow from the old system")
    bwd = JetReducer(new)
    for t, eq in enumerate(old.equations()):
        nf = bwd.reduce(_substitute(eq, record.backward))
        if nf:
            raise CertificationError(f"old equation {t + 1} does not follow from the new system")
    # backward after forward is the identity on old solutions
    for label in old.labels:
        composed = _substitute(record.backward[label], record.forward)
        nf = fwd.reduce(composed)
        ident = fwd.reduce({label: LPDO.one(old.space)})
        if nf != ident:
            raise CertificationError(f"backward map does not invert the forward map on {label}")
    return True


# -- (L1) pivot elimination ---------------------------------------------------------


@dataclass(frozen=True)
class PivotElimination:
    """Equations after eliminating ``u_k`` through equation ``i``.

    ``eliminated`` gives ``u_k``, ``second_order`` is the equation for ``u_i``
    (with the other unknowns), ``first_order`` the remaining ones, all as
    ``{label: LPDO}`` with zero right-hand side.
    """

    system: CharSystem
    pivot: PivotChoice
    eliminated: dict
    second_order: dict
    first_order: tuple

    def equation_strings(self):
        from .charform import format_map

        out = {"eliminated": f"{self.system.labels[self.pivot.col]} = {format_map({'_': self.eliminated})['_']}"}
        out["second_order"] = format_map({"_": self.second_order})["_"] + " = 0"
        out["first_order"] = [format_map({"_": eq})["_"] + " = 0" for eq in self.first_order]
        return out


def pivot_eliminate(S, p):
    i, k = p.row, p.col
    if i >= S.n or k >= S.n:
        raise ValueError(f"pivot {p} out of range for a {S.n}x{S.n} system")
    a = S.alpha
    if a[i][k].is_zero:
        raise TransformUndefinedError(f"pivot {p} has alpha = 0")
    sp = S.space
    L = S.labels
    inv = 1 / a[i][k]
    elim = {L[i]: LPDO.scalar(inv, sp) * (S.ops[i].to_lpdo() - a[i][i])}
    for s in range(S.n):
        if s not in (i, k) and not a[i][s].is_zero:
            elim[L[s]] = LPDO.scalar(-a[i][s] * inv, sp)

    def with_uk(eq):
        out = {}
        for label, op in eq.items():
            if label == L[k]:
                for src, M in elim.items():
                    c = compose(op, M)
                    out[src] = out[src] + c if src in out else c
            else:
                out[label] = out[label] + op if label in out else op
        return {l: v for l, v in out.items() if not v.is_zero}

    eqs = S.equations()
    second = with_uk(eqs[k])
    first = tuple(with_uk(eqs[j]) for j in range(S.n) if j not in (i, k))
    return PivotElimination(S, p, elim, second, first)


# -- (L2) regauging ------------------------------------------------------------------


@dataclass(frozen=True)
class RegaugeData:
    """Shifts ``rho[j]`` and the coefficient matrix ``beta`` of the rewritten system.

    ``beta`` is indexed by the original slots; row ``k`` holds the equation of
    ``ubar_k`` and row ``i`` the one of ``u_i``.
    """

    pivot: PivotChoice
    rho: dict
    beta: tuple
    system: CharSystem

    def to_json(self):
        L = self.system.labels
        return {
            "pivot": str(self.pivot),
            "rho": {L[j]: str(v) for j, v in sorted(self.rho.items())},
            "beta": [[str(c) for c in row] for row in self.beta],
        }


def _new_labels(S, p):
    return tuple(l if t == p.row else f"{l}b" for t, l in enumerate(S.labels))


def _maps(S, p, rho, beta_i):
    """Forward and backward maps of the transformation."""
    sp = S.space
    i, k = p.row, p.col
    a = S.alpha
    L = S.labels
    N = _new_labels(S, p)
    one = LPDO.one(sp)
    others = [s for s in range(S.n) if s not in (i, k)]
    inv = 1 / a[i][k]
    fwd = {N[i]: {L[i]: one}}
    for j in others:
        fwd[N[j]] = {L[j]: one, L[i]: LPDO.scalar(rho[j], sp)}
    # ubar_k = (X_k u_i - beta_ii u_i - sum_s beta_is (u_s + rho_s u_i)) / alpha_ik
    ui = S.ops[k].to_lpdo() - beta_i[i]
    fk = {}
    for s in others:
        ui = ui - beta_i[s] * rho[s]
        if not beta_i[s].is_zero:
            fk[L[s]] = LPDO.scalar(-beta_i[s] * inv, sp)
    fk[L[i]] = LPDO.scalar(inv, sp) * ui
    fwd[N[k]] = fk
    bwd = {L[i]: {N[i]: one}}
    for j in others:
        bwd[L[j]] = {N[j]: one, N[i]: LPDO.scalar(-rho[j], sp)}
    # u_k = (X_i u_i - alpha_ii u_i - sum_s alpha_is (ubar_s - rho_s u_i)) / alpha_ik
    ui = S.ops[i].to_lpdo() - a[i][i]
    bk = {}
    for s in others:
        ui = ui + a[i][s] * rho[s]
        if not a[i][s].is_zero:
            bk[N[s]] = LPDO.scalar(-a[i][s] * inv, sp)
    bk[N[i]] = LPDO.scalar(inv, sp) * ui
    bwd[L[k]] = bk
    return fwd, bwd


def reorder_regauge(elim):
    """Shifts and the rewritten coefficient matrix for the pivot of ``elim``."""
    S, p = elim.system, elim.pivot
    sp = S.space
    n = S.n
    i, k = p.row, p.col
    a = S.alpha
    X = S.ops
    others = [s for s in range(n) if s not in (i, k)]
    rho = {}
    for j in others:
        aj, _ = decompose(X[j], X[i], X[k])
        if aj.is_zero:
            raise DependentOperatorsError(f"X{j + 1} is parallel to X{k + 1}")
        rho[j] = -a[j][k] / (aj * a[i][k])
    beta_i = [sp.zero] * n
    corr = sp.zero
    for s in others:
        phi, psi = decompose(X[i], X[k], X[s])
        if phi.is_zero:
            raise DependentOperatorsError(f"X{i + 1} is parallel to X{s + 1}")
        beta_i[s] = a[i][s] / phi
        corr = corr + beta_i[s] * (psi * a[s][k] + rho[s] * a[i][k])
    cd = commutator_decompose(X[i], X[k])
    beta_i[k] = a[i][k]
    beta_i[i] = (X[k](a[i][k]) + a[i][k] * a[k][k] + cd.P * a[i][k] - corr) / a[i][k]

    fwd, _ = _maps(S, p, rho, beta_i)
    N = _new_labels(S, p)
    reducer = JetReducer(S)
    basis = [reducer.reduce(fwd[N[t]]) for t in range(n)]
    keys = sorted({key for nf in basis for key in nf})

    def solve_row(slot, op):
        target = reducer.reduce(_substitute({N[slot]: op.to_lpdo()}, fwd))
        extra = set(target) - set(keys)
        if extra:
            raise CertificationError(f"row {slot + 1} leaves jets {sorted(extra)} outside the new unknowns")
        mat = [[nf.get(key, sp.zero) for nf in basis] for key in keys]
        rhs = [target.get(key, sp.zero) for key in keys]
        try:
            return linalg.solve(mat, rhs)
        except ValueError as exc:
            raise CertificationError(f"row {slot + 1} of the rewritten system is not determined: {exc}") from None

    beta = [None] * n
    beta[i] = beta_i
    beta[k] = solve_row(k, X[i])
    for j in others:
        beta[j] = solve_row(j, X[j])
    check_i = solve_row(i, X[k])
    if check_i != beta_i:
        raise CertificationError("equation of u_i disagrees with the closed-form coefficients")
    return RegaugeData(p, rho, tuple(tuple(r) for r in beta), S)


# -- (L3) reassembly -----------------------------------------------------------------


def reassemble(data):
    """Transformed system and its substitution record."""
    S, p = data.system, data.pivot
    i, k = p.row, p.col
    ops = list(S.ops)
    ops[i], ops[k] = S.ops[k], S.ops[i]
    N = _new_labels(S, p)
    fwd, bwd = _maps(S, p, data.rho, data.beta[i])
    rec = SubstitutionRecord("generalized", S.labels, N, fwd, bwd, note=f"pivot {p}")
    names = list(S.names)
    names[i], names[k] = S.names[k], S.names[i]
    T = CharSystem(ops, [list(r) for r in data.beta], N, S.history + (rec,), names)
    certify_transform(S, T, rec)
    return T, rec


def generalized_transform(S, p):
    """``(system, record)`` of the generalized Laplace transformation with pivot ``p``."""
    return reassemble(reorder_regauge(pivot_eliminate(S, p)))


def cyclic_invariants(S):
    """Cyclic products ``a_ij a_ji`` and ``a_ij a_jk a_ki`` keyed by 1-based index tuples."""
    a = S.alpha
    out = {}
    for i, j in itertools.combinations(range(S.n), 2):
        out[(i + 1, j + 1)] = a[i][j] * a[j][i]
    for i, j, k in itertools.combinations(range(S.n), 3):
        out[(i + 1, j + 1, k + 1)] = a[i][j] * a[j][k] * a[k][i]
        out[(i + 1, k + 1, j + 1)] = a[i][k] * a[k][j] * a[j][i]
    return out
