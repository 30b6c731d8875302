"""Structure detection, triangular integration, back-substitution and the search driver."""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .charform import (
    CharSystem,
    apply_map,
    first_order_to_charsys,
    nth_order_to_charsys,
    second_order_to_charsys,
)
from .errors import CertificationError, HyperLaplaceError, TransformUndefinedError
from .integrate import (
    FunctionInfo,
    SolutionBundle,
    eliminate_quadratures,
    fresh_name,
    solve_first_order_scalar,
)
from .lpdo import LPDO

__all__ = [
    "StructureReport",
    "structure_classify",
    "solve_first_order_scalar",
    "eliminate_quadratures",
    "solve_triangular",
    "back_substitute",
    "DriverConfig",
    "SolveReport",
    "factorize_and_solve",
    "SolutionBundle",
    "FunctionInfo",
]


# -- structure ---------------------------------------------------------------------


@dataclass(frozen=True)
class StructureReport:
    classification: str
    ordering: tuple
    blocks: tuple

    def to_json(self):
        return {
            "classification": self.classification,
            "ordering": list(self.ordering),
            "blocks": [list(b) for b in self.blocks],
        }


def structure_classify(S):
    """Strongly connected components of the coupling digraph, in solving order.

    Edge ``j -> s`` means equation ``j`` involves ``u_s`` (``alpha[j][s] != 0``);
    a block only depends on blocks listed before it.
    """
    n = S.n
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from((j, s) for j in range(n) for s in range(n) if s != j and not S.alpha[j][s].is_zero)
    cond = nx.condensation(g)
    members = {c: sorted(cond.nodes[c]["members"]) for c in cond.nodes}
    # reversed edges put dependencies first
    order = list(nx.lexicographical_topological_sort(cond.reverse(copy=True), key=lambda c: members[c][0]))
    blocks = tuple(tuple(S.labels[i] for i in members[c]) for c in order)
    if all(len(b) == 1 for b in blocks):
        kind = "triangular"
    elif len(blocks) == 1:
        kind = "irreducible"
    else:
        kind = "block-triangular"
    return StructureReport(kind, tuple(l for b in blocks for l in b), blocks)


# -- triangular systems ----------------------------------------------------------------


def check_bundle(S, values):
    """Exact residuals of ``S`` on ``values``; raises if any is nonzero."""
    for i, r in enumerate(S.residuals(values)):
        if not r.is_zero:
            raise CertificationError(f"equation {i + 1} of the system leaves residual {r}")


def solve_triangular(S, report=None, coords=None):
    """Solve a triangular system equation by equation, then remove quadratures."""
    report = report or structure_classify(S)
    if report.classification != "triangular":
        raise TransformUndefinedError(f"system is {report.classification}, not triangular")
    if coords is not None:
        raise NotImplementedError("solving in characteristic coordinates of variable-coefficient operators is not implemented")
    index = {l: i for i, l in enumerate(S.labels)}
    values, functions = {}, {}
    for label in report.ordering:
        j = index[label]
        rhs = None
        for s, other in enumerate(S.labels):
            if s != j and not S.alpha[j][s].is_zero:
                term = values[other] * S.alpha[j][s]
                rhs = term if rhs is None else rhs + term
        name = fresh_name(set(functions))
        values[label], functions[name] = solve_first_order_scalar(S.ops[j], S.alpha[j][j], rhs, name)
    bundle = SolutionBundle(S.labels, {l: values[l] for l in S.labels}, functions, system=S)
    bundle = eliminate_quadratures(bundle)
    check_bundle(S, bundle.values)
    return bundle


def back_substitute(bundle, trail):
    """Apply the backward maps of ``trail`` (latest record first)."""
    values = dict(bundle.values)
    labels = bundle.labels
    for rec in trail:
        missing = set(rec.new) - set(values)
        if missing:
            raise ValueError(f"trail record {rec.kind} expects unknowns {sorted(missing)} not in the bundle")
        values = apply_map(rec.backward, values)
        labels = rec.old
    return bundle.replace(labels=tuple(labels), values=values, trail=bundle.trail + tuple(trail))


# -- the search driver ---------------------------------------------------------------


@dataclass
class DriverConfig:
    """Search bounds and verification settings.

    ``pivots`` is ``"all"``, ``"first"`` or a list of PivotChoice applied one per
    depth level.
    """

    max_depth: int = 4
    pivots: object = "all"
    maxN: int = 10
    maxK: int = 10
    verify: bool = False
    seed: int = 0
    points: int = 20

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be nonnegative")
        if self.maxN < 0 or self.maxK < 0:
            raise ValueError("chain bounds must be nonnegative")
        if self.points < 1:
            raise ValueError("points must be positive")

    def to_json(self):
        pivots = self.pivots if isinstance(self.pivots, str) else [str(p) for p in self.pivots]
        return {
            "max_depth": self.max_depth,
            "pivots": pivots,
            "chain_max": [self.maxN, self.maxK],
            "verify": self.verify,
            "seed": self.seed,
            "points": self.points,
        }


@dataclass
class SolveReport:
    status: str
    problem_kind: str
    system: CharSystem | None = None
    conversion: tuple = ()
    structure: StructureReport | None = None
    trace: list = field(default_factory=list)
    chains: list = field(default_factory=list)
    bundle: SolutionBundle | None = None
    path: tuple = ()
    verification: object = None
    diagnostics: list = field(default_factory=list)

    @property
    def solved(self):
        return self.status == "solved"


def convert(problem):
    """Step I: ``(CharSystem, kind)`` for a scalar equation, first-order system or CharSystem."""
    from .dsl import FirstOrderProblem, ProblemFile

    if isinstance(problem, ProblemFile):
        problem = problem.problem
    if isinstance(problem, CharSystem):
        return problem, "system"
    if isinstance(problem, LPDO):
        if problem.order == 2:
            S, _, _, _ = second_order_to_charsys(problem)
        else:
            S, _ = nth_order_to_charsys(problem)
        return S, "equation"
    if isinstance(problem, FirstOrderProblem):
        S, _ = first_order_to_charsys(problem.a, problem.b, problem.unknowns)
        return S, "firstorder"
    raise TypeError(f"unsupported problem type {type(problem).__name__}")


def _memo_key(S):
    return (S.ops, S.alpha)


def _candidate_pivots(S, config, depth):
    from .genlaplace import pivots_of

    admissible = pivots_of(S)
    if config.pivots == "all":
        return admissible
    if config.pivots == "first":
        return admissible[:1]
    manual = list(config.pivots)
    if depth >= len(manual):
        return []
    p = manual[depth]
    return [p] if p in admissible else []


def _entry(depth, path, S, action, **extra):
    from .genlaplace import cyclic_invariants

    return {
        "depth": depth,
        "path": [str(p) for p in path],
        "system": S.to_json(),
        "cyclic_invariants": {":".join(map(str, k)): str(v) for k, v in cyclic_invariants(S).items()},
        "action": action,
        **extra,
    }


def _finish(bundle, base, trail):
    """Push a bundle of ``base`` back to the user's unknowns."""
    bundle = back_substitute(bundle, trail)
    return back_substitute(bundle, list(reversed(base.history)))


def _complexity(bundle):
    return (not bundle.quadrature_free, sum(len(v.terms()) for v in bundle.values.values()))


def _attempt(S, depth, path, config, report):
    """Try to solve ``S`` directly; returns a bundle of ``S`` or None."""
    from .cascade import cascade_run, cascade_solve

    structure = structure_classify(S)
    if structure.classification == "triangular":
        try:
            bundle = solve_triangular(S, structure)
        except HyperLaplaceError as exc:
            report.trace.append(_entry(depth, path, S, "triangular-failed", error=str(exc)))
        else:
            report.trace.append(_entry(depth, path, S, "solved-triangular"))
            return bundle
    if S.n != 2:
        return None
    chain = cascade_run(S, config.maxN, config.maxK)
    report.chains.append(chain)
    if chain.status == "depth-exhausted":
        report.trace.append(_entry(depth, path, S, "cascade-exhausted", chain=chain.status))
        return None
    try:
        bundle = cascade_solve(chain)
    except HyperLaplaceError as exc:
        report.trace.append(_entry(depth, path, S, "cascade-failed", chain=chain.status, error=str(exc)))
        return None
    report.trace.append(_entry(depth, path, S, "solved-cascade", chain=chain.status))
    return bundle


def factorize_and_solve(problem, config=None):
    """Convert, classify, and search over generalized Laplace transformations.

    The search is breadth first; among the solutions found at the first
    successful depth the simplest one (quadrature-free first, then fewest
    terms, then pivot path) is returned. 2x2 systems are handled by the
    Laplace cascade and are not expanded further.
    """
    from .genlaplace import generalized_transform

    config = config or DriverConfig()
    base, kind = convert(problem)
    report = SolveReport("exhausted", kind, system=base, conversion=base.history)
    report.structure = structure_classify(base)
    level = [(base, (), [])]
    seen = {_memo_key(base)}
    for depth in range(config.max_depth + 1):
        found = []
        for S, path, trail in level:
            bundle = _attempt(S, depth, path, config, report)
            if bundle is not None:
                found.append((_complexity(bundle), path, bundle, trail))
        if found:
            # stable sort keeps the pivot enumeration order among ties
            found.sort(key=lambda t: t[0])
            _, path, bundle, trail = found[0]
            report.bundle = _finish(bundle, base, trail)
            report.status, report.path = "solved", path
            return report
        if depth == config.max_depth:
            for S, path, _ in level:
                if S.n > 2:
                    report.trace.append(_entry(depth, path, S, "depth-limit"))
            break
        nxt = []
        for S, path, trail in level:
            if S.n == 2:
                continue
            report.trace.append(_entry(depth, path, S, "expand"))
            for p in _candidate_pivots(S, config, depth):
                try:
                    T, rec = generalized_transform(S, p)
                except HyperLaplaceError as exc:
                    report.diagnostics.append(f"pivot {p} at path {[str(q) for q in path]}: {exc}")
                    continue
                key = _memo_key(T)
                if key in seen:
                    continue
                seen.add(key)
                nxt.append((T, path + (p,), [rec] + trail))
        if not nxt:
            break
        level = nxt
    return report
