"""Invariants of a first-order system with symbolic coefficients.

The system W_t = p W_x + q W1_x + ..., W1_t = q W_x + p W1_x + ... with
p = p1 x + p2 x^2 and q = q2 x^2 comes from a process driven by two-state
noise. Its Laplace invariants do not depend on p2 or q2, and the chain never
terminates for generic parameters: h moves through nu^2 - m^2 p1^2.
"""

from hyperlaplace import VarSpec, cascade_run, first_order_to_charsys, laplace_invariants_sys

sp = VarSpec("t", "x", params=("nu", "p1", "p2", "q2"))
x, nu, p1, p2, q2 = (sp.symbol(n) for n in ("x", "nu", "p1", "p2", "q2"))
p = p1 * x + p2 * x**2
q = q2 * x**2
a = [[-p, -q], [-q, -p]]
b = [[-p.diff("x"), -q.diff("x")], [-q.diff("x"), -p.diff("x") - 2 * nu]]

S, record = first_order_to_charsys(a, b, ("W", "W1"))
print("characteristic system:")
for line in S.to_json()["equations"]:
    print("   ", line)
print("with", ", ".join(f"{k} = {v}" for k, v in record.to_json()["forward"].items()))

h, k = laplace_invariants_sys(S)
print(f"\nh = {h}\nk = {k}")

chain = cascade_run(S, 3, 3)
print(f"\nchain ({chain.status}):")
for m, value in chain.h_values().items():
    print(f"    h({m:+d}) = {value}")
