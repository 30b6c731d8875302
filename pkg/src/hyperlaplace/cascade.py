"""Laplace invariants, the X1/X2 transformations and invariant chains of 2x2 systems.

For ``X1 u1 = a11 u1 + a12 u2``, ``X2 u2 = a21 u1 + a22 u2`` with
``[X1, X2] = P X1 + Q X2`` the invariants are ``k = a12 a21`` and

    h = X2(a11) - X1(a22) - X1(l) - X1(P) + P a11 + a12 a21 + (a22 + l + P) Q,

``l = X2(a12)/a12``. They coincide with the invariants of the scalar operator
obtained by eliminating ``u2``, written as ``X1 X2 + ...``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .charform import CharSystem, SubstitutionRecord, apply_map, charsys2_to_second_order, operator_form
from .errors import TransformUndefinedError
from .integrate import SolutionBundle, solve_first_order_scalar
from .lpdo import LPDO, commutator_decompose

DEFAULT_MAX = 10


def _require_2x2(S):
    if S.n != 2:
        raise ValueError(f"expected a 2x2 system, got {S.n}x{S.n}")


def laplace_invariants_sys(S):
    """``(h, k)`` of a 2x2 characteristic system.

    With ``a12 = 0`` the formula is unavailable and ``h`` is taken from the
    elimination of ``u1`` instead; with ``a12 = a21 = 0`` both are 0.
    """
    _require_2x2(S)
    X1, X2 = S.ops
    a = S.alpha
    k = a[0][1] * a[1][0]
    if a[0][1].is_zero:
        if a[1][0].is_zero:
            return S.space.zero, S.space.zero
        L, _ = charsys2_to_second_order(S, keep=1)
        return operator_form(L, X1, X2).k, k
    cd = commutator_decompose(X1, X2)
    P, Q = cd.P, cd.Q
    l = X2(a[0][1]) / a[0][1]
    h = X2(a[0][0]) - X1(a[1][1]) - X1(l) - X1(P) + P * a[0][0] + k + (a[1][1] + l + P) * Q
    return h, k


def invariants_method(S):
    """How :func:`laplace_invariants_sys` obtains ``h``: formula, elimination or decoupled."""
    a = S.alpha
    if not a[0][1].is_zero:
        return "formula"
    return "decoupled" if a[1][0].is_zero else "elimination"


def h_next(S):
    """``h`` of the X1-transformed system predicted from ``S`` alone."""
    h, k = laplace_invariants_sys(S)
    if h.is_zero:
        raise TransformUndefinedError("h = 0: the X1 substitution is not defined")
    X1, X2 = S.ops
    cd = commutator_decompose(X1, X2)
    P, Q = cd.P, cd.Q
    l2 = X2(h) / h
    return 2 * h - k - X1(l2) + Q * l2 + X2(Q) - X1(P) + 2 * P * Q


def k_prev(S):
    """``k`` of the X2-transformed system predicted from ``S`` alone."""
    h, k = laplace_invariants_sys(S)
    if k.is_zero:
        raise TransformUndefinedError("k = 0: the X2 substitution is not defined")
    X1, X2 = S.ops
    cd = commutator_decompose(X1, X2)
    P, Q = cd.P, cd.Q
    l1 = X1(k) / k
    return 2 * k - h - X2(l1) - P * l1 + X2(Q) - X1(P) + 2 * P * Q


def _x1(S, labels):
    X1, X2 = S.ops
    a = S.alpha
    L, _ = charsys2_to_second_order(S, keep=0)
    f = operator_form(L, X1, X2)
    sp = S.space
    l1, l2 = S.labels
    labels = tuple(labels) if labels else (f"{l1}b", l1)
    bar, kept = labels
    T = CharSystem([X1, X2], [[-f.a2, f.h], [sp.one, -f.a1]], labels)
    rec = SubstitutionRecord(
        "laplace-x1",
        S.labels,
        labels,
        {bar: {l1: X2.to_lpdo() + f.a1}, kept: {l1: LPDO.one(sp)}},
        {l1: {kept: LPDO.one(sp)}, l2: {kept: LPDO.scalar(1 / a[0][1], sp) * (X1.to_lpdo() - a[0][0])}},
    )
    return T.with_history(*S.history, rec), rec


def _x2(S, labels):
    X1, X2 = S.ops
    a = S.alpha
    L, _ = charsys2_to_second_order(S, keep=1)
    f = operator_form(L, X1, X2)
    sp = S.space
    b1, b2 = f.a1 + f.P, f.a2 + f.Q
    l1, l2 = S.labels
    labels = tuple(labels) if labels else (l2, f"{l2}b")
    kept, bar = labels
    T = CharSystem([X1, X2], [[-b2, sp.one], [f.k, -b1]], labels)
    rec = SubstitutionRecord(
        "laplace-x2",
        S.labels,
        labels,
        {kept: {l2: LPDO.one(sp)}, bar: {l2: X1.to_lpdo() + b2}},
        {l1: {kept: LPDO.scalar(1 / a[1][0], sp) * (X2.to_lpdo() - a[1][1])}, l2: {kept: LPDO.one(sp)}},
    )
    return T.with_history(*S.history, rec), rec


def x1_transform(S, labels=None):
    """X1 Laplace transformation; returns ``(system, record)``.

    New unknowns ``(ubar, u1)`` with ``ubar = (X2 + a1) u1``, where ``a1`` is
    taken from the eliminated operator. The output has ``k = h`` of the input.
    """
    _require_2x2(S)
    h, _ = laplace_invariants_sys(S)
    if h.is_zero:
        raise TransformUndefinedError("h = 0: the X1 substitution is not defined")
    if S.alpha[0][1].is_zero:
        raise TransformUndefinedError("alpha12 = 0: u2 cannot be eliminated")
    return _x1(S, labels)


def x2_transform(S, labels=None):
    """X2 Laplace transformation; returns ``(system, record)``.

    New unknowns ``(u2, w)`` with ``w = (X1 + b2) u2``; the output has ``h = k``
    of the input.
    """
    _require_2x2(S)
    _, k = laplace_invariants_sys(S)
    if k.is_zero:
        raise TransformUndefinedError("k = 0: the X2 substitution is not defined")
    return _x2(S, labels)


# -- chains ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainStep:
    index: int
    system: CharSystem
    record: SubstitutionRecord
    h: object
    k: object


@dataclass
class LaplaceChain:
    """Systems reached from ``base`` by repeated X1 (forward) and X2 (backward) steps."""

    base: CharSystem
    h0: object
    k0: object
    forward: list = field(default_factory=list)
    backward: list = field(default_factory=list)
    forward_terminated: bool = False
    backward_terminated: bool = False
    max_forward: int = DEFAULT_MAX
    max_backward: int = DEFAULT_MAX

    @property
    def status(self):
        if self.forward_terminated and self.backward_terminated:
            return "terminated-both"
        if self.forward_terminated:
            return "terminated-forward"
        if self.backward_terminated:
            return "terminated-backward"
        return "depth-exhausted"

    @property
    def N(self):
        return len(self.forward) if self.forward_terminated else None

    @property
    def K(self):
        return len(self.backward) if self.backward_terminated else None

    def h_values(self):
        """``{i: h_(i)}`` for every computed system (backward ones hold ``k = h_(i-1)``)."""
        out = {0: self.h0, -1: self.k0}
        for step in self.forward:
            out[step.index] = step.h
        for step in self.backward:
            out[step.index - 1] = step.k
        return dict(sorted(out.items()))

    def end(self, side):
        steps = self.forward if side == "forward" else self.backward
        return steps[-1].system if steps else self.base

    def records(self, side):
        """Records from the end of ``side`` back to the base, latest first."""
        steps = self.forward if side == "forward" else self.backward
        return [s.record for s in reversed(steps)]

    def to_json(self):
        return {
            "status": self.status,
            "N": self.N,
            "K": self.K,
            "h0": str(self.h0),
            "k0": str(self.k0),
            "invariants": {str(i): str(v) for i, v in self.h_values().items()},
            "forward": [
                {"index": s.index, "h": str(s.h), "k": str(s.k), "record": s.record.to_json()} for s in self.forward
            ],
            "backward": [
                {"index": s.index, "h": str(s.h), "k": str(s.k), "record": s.record.to_json()} for s in self.backward
            ],
        }


def cascade_run(S, maxN=DEFAULT_MAX, maxK=DEFAULT_MAX):
    """Build the forward and backward Laplace chains of ``S`` up to the bounds."""
    _require_2x2(S)
    h0, k0 = laplace_invariants_sys(S)
    chain = LaplaceChain(S, h0, k0, max_forward=maxN, max_backward=maxK)
    l1, l2 = S.labels

    cur, h = S, h0
    cur_label = l1
    while not h.is_zero and len(chain.forward) < maxN and not cur.alpha[0][1].is_zero:
        i = len(chain.forward) + 1
        new_label = f"v{i}"
        cur, rec = _x1(cur, (new_label, cur_label))
        cur_label = new_label
        h, k = laplace_invariants_sys(cur)
        chain.forward.append(ChainStep(i, cur, rec, h, k))
    chain.forward_terminated = h.is_zero

    cur, k = S, k0
    cur_label = l2
    while not k.is_zero and len(chain.backward) < maxK:
        j = len(chain.backward) + 1
        new_label = f"w{j}"
        cur, rec = _x2(cur, (cur_label, new_label))
        cur_label = new_label
        h, k = laplace_invariants_sys(cur)
        chain.backward.append(ChainStep(-j, cur, rec, h, k))
    chain.backward_terminated = k.is_zero
    return chain


# -- solutions of terminated chains -------------------------------------------------


def _forward_family(E, name):
    """Quadrature-free solutions of a system with ``h = 0``, function of the X2-invariant."""
    X1, X2 = E.ops
    a = E.alpha
    l1, l2 = E.labels
    sp = E.space
    if a[0][1].is_zero:
        u2, info = solve_first_order_scalar(X2, a[1][1], None, name)
        return {l1: u2 * sp.zero, l2: u2}, info
    L, _ = charsys2_to_second_order(E, keep=0)
    f = operator_form(L, X1, X2)
    u1, info = solve_first_order_scalar(X2, -f.a1, None, name)
    u2 = (X1(u1) - u1 * a[0][0]) / a[0][1]
    return {l1: u1, l2: u2}, info


def _backward_family(E, name):
    """Quadrature-free solutions of a system with ``a21 = 0``, function of the X1-invariant."""
    X1, _ = E.ops
    l1, l2 = E.labels
    u1, info = solve_first_order_scalar(X1, E.alpha[0][0], None, name)
    return {l1: u1, l2: u1 * E.space.zero}, info


def _push(values, records):
    for rec in records:
        values = apply_map(rec.backward, values)
    return values


def cascade_solve(chain, coords=None):
    """Closed-form general solution of the chain's base system.

    Both sides terminated: the sum of the quadrature-free families pushed back
    from each end. One side terminated: the triangular system at that end is
    solved with quadratures (then simplified) and pushed back.
    """
    from .solver import solve_triangular, structure_classify

    if coords is not None:
        raise NotImplementedError("solving in characteristic coordinates of variable-coefficient operators is not implemented")
    base = chain.base
    if not (chain.forward_terminated or chain.backward_terminated):
        raise TransformUndefinedError("the chain did not terminate on either side")
    fwd_end = chain.end("forward") if chain.forward_terminated else None
    bwd_end = chain.end("backward") if chain.backward_terminated else None
    fwd_trail = chain.records("forward")
    bwd_trail = chain.records("backward")

    if fwd_end is not None and bwd_end is not None and bwd_end.alpha[1][0].is_zero:
        fv, finfo = _forward_family(fwd_end, "F")
        bv, binfo = _backward_family(bwd_end, "G")
        fv, bv = _push(fv, fwd_trail), _push(bv, bwd_trail)
        values = {l: fv[l] + bv[l] for l in base.labels}
        return SolutionBundle(
            base.labels,
            values,
            {"F": finfo, "G": binfo},
            trail=tuple(fwd_trail) + tuple(bwd_trail),
            system=base,
            notes=(f"forward family from step {chain.N}, backward family from step {-chain.K}",),
        )

    if fwd_end is not None:
        if fwd_end.alpha[0][1].is_zero:
            end, trail = fwd_end, fwd_trail
        else:
            end, rec = _x1(fwd_end, None)
            trail = [rec] + fwd_trail
    else:
        end, trail = bwd_end, bwd_trail
    bundle = solve_triangular(end, structure_classify(end))
    values = _push(bundle.values, trail)
    return bundle.replace(labels=base.labels, values=values, trail=bundle.trail + tuple(trail), system=base)
