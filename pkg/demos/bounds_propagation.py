"""Interval propagation for TC^Sigma, from literature seeds and cup-lengths."""

from symsquare.bounds import K, at_least, kb_default, lower_bound_facts, propagate

kb = kb_default(3)

# RP^4: the cup-length of SP^2(RP^4) meets the embedding dimension
result = propagate(kb + lower_bound_facts("rp:4", kb))
for kind, iv in result.report("rp:4").items():
    print(kind.pretty("rp:4"), iv)
print()
print("\n".join(result.trace.explain(("rp:4", K.TCSigma))))

# the circle is settled through the product rule on the torus
print()
result = propagate(kb + lower_bound_facts("circle", kb))
print("TC^Sigma(S^1)", result.get("circle", K.TCSigma))
print("TC^Sigma(T^2)", result.get("torus", K.TCSigma), "(left open)")

# a contradictory extra fact is reported, not silently dropped
result = propagate(kb + [at_least("rp:2", K.TCSigma, 5, "deliberately wrong")])
for conflict in result.conflicts:
    print(conflict)
