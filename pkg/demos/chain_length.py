"""Laplace chains of Dx Dy - c/(x+y)^2.

For c = n(n+1) the chain reaches a zero invariant after n steps in either
direction and the equation has a closed-form general solution. Other values
of c give chains that run until the depth bound.
"""

from hyperlaplace import VarSpec, cascade_run, factorize_and_solve, parse_operator, second_order_to_charsys

sp = VarSpec()
for c in (2, 6, 12, 1):
    A = parse_operator(f"Dx*Dy - {c}/(x+y)^2", sp)
    S, _, h, k = second_order_to_charsys(A)
    chain = cascade_run(S, 5, 5)
    print(f"c = {c}: {chain.status}" + (f" after N = {chain.N}, K = {chain.K}" if chain.N is not None else ""))
    for m, value in chain.h_values().items():
        print(f"    h({m:+d}) = {value}")

A = parse_operator("Dx*Dy - 2/(x+y)^2", sp)
result = factorize_and_solve(A)
print("\ngeneral solution for c = 2:")
print("    u =", result.bundle["u"])
print("    residual:", A.apply(result.bundle["u"]))
