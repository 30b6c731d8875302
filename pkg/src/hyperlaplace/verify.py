"""Exact operator identities and numeric residuals of solution bundles."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .cascade import laplace_invariants_sys
from .charform import CharSystem, charsys2_to_second_order, operator_invariants
from .errors import RealizationError
from .expr import PoleError
from .lpdo import LPDO

DEFAULT_BOX = (-1.0, 1.0)
DEFAULT_POINTS = 20
DEFAULT_SEED = 0


@dataclass(frozen=True)
class IdentityResult:
    passed: bool
    residual: LPDO

    def __bool__(self):
        return self.passed

    def to_json(self):
        return {"passed": self.passed, "residual": str(self.residual)}


def operator_identity(A, B):
    """Exact comparison of two operators; the residual is ``A - B``."""
    if A.space != B.space:
        raise ValueError("operators over different VarSpecs")
    r = A - B
    return IdentityResult(r.is_zero, r)


# -- realizations of arbitrary functions ---------------------------------------------


@dataclass(frozen=True)
class Generator:
    """A smooth test function of one variable with all derivatives in closed form."""

    tag: str
    params: tuple

    def __call__(self, t, order=0):
        if self.tag == "sine":
            amp, freq, phase = self.params
            return amp * freq**order * math.sin(freq * t + phase + order * math.pi / 2)
        if self.tag == "exp":
            amp, rate = self.params
            return amp * rate**order * math.exp(rate * t)
        if self.tag == "polynomial":
            total = 0.0
            for p, c in enumerate(self.params):
                if p >= order:
                    total += c * math.perm(p, order) * t ** (p - order)
            return total
        raise ValueError(f"unknown generator {self.tag!r}")

    def __str__(self):
        return f"{self.tag}{self.params}"


def sine(freq=1.0, amp=1.0, phase=0.0):
    return Generator("sine", (amp, freq, phase))


def exponential(rate=1.0, amp=1.0):
    return Generator("exp", (amp, rate))


def polynomial(*coeffs):
    """``sum coeffs[p] t^p``."""
    return Generator("polynomial", tuple(float(c) for c in coeffs))


@dataclass
class RealizationSpec:
    """Concrete functions, parameter values and the sample box for numeric checks.

    Functions without an explicit generator get a seeded one.
    """

    functions: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    box: tuple = DEFAULT_BOX
    points: int = DEFAULT_POINTS
    seed: int = DEFAULT_SEED

    def realize(self, names, space):
        rng = random.Random(f"functions:{self.seed}")
        out = {}
        for k, name in enumerate(sorted(names)):
            gen = self.functions.get(name)
            if gen is None:
                kind = k % 3
                if kind == 0:
                    gen = sine(rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0, 1))
                elif kind == 1:
                    gen = polynomial(*(rng.uniform(-1, 1) for _ in range(6)))
                else:
                    gen = exponential(rng.uniform(-0.7, 0.7), rng.uniform(0.5, 1.5))
            out[name] = gen
        rng = random.Random(f"params:{self.seed}")
        values = {}
        for p in space.params:
            values[p] = self.params.get(p, rng.uniform(0.5, 1.5))
        return out, values


# -- residual checks -------------------------------------------------------------------


@dataclass
class VerificationReport:
    exact: list = field(default_factory=list)
    numeric: dict | None = None
    points: int = 0
    pole_skipped: int = 0
    realization: dict = field(default_factory=dict)

    @property
    def exact_passed(self):
        return all(e["passed"] for e in self.exact)

    @property
    def max_residual(self):
        if not self.numeric:
            return None
        return max(self.numeric.values())

    def passed(self, tol=1e-9):
        if not self.exact_passed:
            return False
        return self.numeric is None or self.max_residual <= tol

    def to_json(self):
        out = {"exact": self.exact, "points": self.points, "pole_skipped": self.pole_skipped}
        if self.numeric is not None:
            out["numeric"] = {k: v for k, v in self.numeric.items()}
            out["max_residual"] = self.max_residual
            out["realization"] = self.realization
        return out


def _equations(target, values):
    """``[(name, lhs pieces)]`` with each residual written as ``sum_k c_k * e_k``.

    Pieces are ``(Scalar or None, SolutionExpr)``; None means coefficient 1.
    """
    from .dsl import FirstOrderProblem

    if isinstance(target, CharSystem):
        out = []
        for i in range(target.n):
            pieces = [(None, target.ops[i](values[target.labels[i]]))]
            for k, l in enumerate(target.labels):
                if not target.alpha[i][k].is_zero:
                    pieces.append((-target.alpha[i][k], values[l]))
            out.append((f"eq{i + 1}", pieces))
        return out
    if isinstance(target, LPDO):
        (u,) = values.values()
        pieces = []
        for (i, j), c in sorted(target.coeffs.items()):
            d = u
            for _ in range(i):
                d = d.diff(target.space.first)
            for _ in range(j):
                d = d.diff(target.space.second)
            pieces.append((c, d))
        return [("equation", pieces)]
    if isinstance(target, FirstOrderProblem):
        sp = next(iter(values.values())).space
        out = []
        for r, name in enumerate(target.unknowns):
            pieces = [(None, values[name].diff(sp.first))]
            for k, other in enumerate(target.unknowns):
                if not target.a[r][k].is_zero:
                    pieces.append((-target.a[r][k], values[other].diff(sp.second)))
                if not target.b[r][k].is_zero:
                    pieces.append((-target.b[r][k], values[other]))
            out.append((name, pieces))
        return out
    raise TypeError(f"cannot verify against {type(target).__name__}")


def _exact(pieces):
    total = None
    for c, e in pieces:
        term = e if c is None else e * c
        total = term if total is None else total + term
    return total


def residual_check(target, bundle, spec=None):
    """Exact residuals always; numeric residuals for quadrature-free bundles.

    The numeric tier evaluates every piece of each residual separately, so the
    result reflects floating-point agreement rather than symbolic cancellation.
    Residuals are scaled by ``max(1, largest piece)``.
    """
    from .dsl import ProblemFile

    if isinstance(target, ProblemFile):
        target = target.problem
    spec = spec or RealizationSpec()
    values = bundle if isinstance(bundle, dict) else bundle.values
    eqs = _equations(target, values)
    report = VerificationReport()
    for name, pieces in eqs:
        r = _exact(pieces)
        report.exact.append({"equation": name, "passed": r.is_zero, **({} if r.is_zero else {"residual": str(r)})})
    if any(v.has_integral for v in values.values()):
        return report
    space = next(iter(values.values())).space
    names = set()
    for v in values.values():
        names.update(v.functions())
    gens, params = spec.realize(names, space)
    report.realization = {n: str(g) for n, g in sorted(gens.items())}
    rng = random.Random(f"points:{spec.seed}")
    lo, hi = spec.box
    worst = {name: 0.0 for name, _ in eqs}
    accepted = attempts = 0
    while accepted < spec.points:
        attempts += 1
        if attempts > 50 * spec.points:
            raise RealizationError(f"only {accepted} usable sample points out of {attempts - 1}")
        pt = [rng.uniform(lo, hi), rng.uniform(lo, hi)] + [params[p] for p in space.params]
        try:
            row = {}
            for name, pieces in eqs:
                terms = []
                for c, e in pieces:
                    v = e.evaluate(pt, gens)
                    terms.append(v if c is None else c.evaluate(pt) * v)
                # relative to the largest term so that points near a pole do not dominate
                row[name] = abs(math.fsum(terms)) / max(1.0, max(abs(t) for t in terms))
        except (PoleError, ZeroDivisionError, OverflowError, ValueError):
            report.pole_skipped += 1
            continue
        accepted += 1
        for name, v in row.items():
            worst[name] = max(worst[name], v)
    report.numeric = worst
    report.points = accepted
    return report


# -- gauge and rescaling properties ------------------------------------------------------


@dataclass
class PropertySummary:
    trials: int
    failures: list

    @property
    def passed(self):
        return not self.failures

    def to_json(self):
        return {"trials": self.trials, "passed": self.passed, "failures": self.failures}


def _random_gauge(space, rng):
    """Nonzero rational function ``c + a*x + b*y`` (occasionally a ratio of two)."""
    x, y = space.symbol(space.first), space.symbol(space.second)

    def lin():
        c = rng.choice([1, 2, 3, -1, -2])
        return space(c) + x * rng.randint(-2, 2) + y * rng.randint(-2, 2)

    g = lin()
    if rng.random() < 0.3:
        g = g / lin()
    return g


def gauge_property_suite(S, trials=10, seed=DEFAULT_SEED):
    """Gauge invariance, rescaling covariance and formula/elimination agreement of ``(h, k)``."""
    rng = random.Random(seed)
    sp = S.space
    h, k = laplace_invariants_sys(S)
    failures = []
    if not S.alpha[0][1].is_zero:
        L, _ = charsys2_to_second_order(S, keep=0)
        hl, kl = operator_invariants(L, *S.ops)
        if (hl, kl) != (h, k):
            failures.append("formula and elimination disagree")
    for t in range(trials):
        g = [_random_gauge(sp, rng) for _ in range(S.n)]
        G, _ = S.gauge(g)
        if laplace_invariants_sys(G) != (h, k):
            failures.append(f"trial {t}: gauge {[str(v) for v in g]} changed the invariants")
        gamma = [_random_gauge(sp, rng) for _ in range(S.n)]
        hr, kr = laplace_invariants_sys(S.rescale(gamma))
        scale = gamma[0] * gamma[1]
        if hr != h * scale or kr != k * scale:
            failures.append(f"trial {t}: rescaling by {[str(v) for v in gamma]} is not covariant")
    return PropertySummary(trials, failures)
