"""Height of phi(1,x) in H*(SP^2 RP^m) against the dyadic law.

For 2^e <= m < 2^(e+1) the class phi(1,x) has height exactly 2^(e+1), which
is what forces sb(2^e) >= 2^(e+1).
"""

from symsquare import build_sp2, make_rp
from symsquare.bounds import phi_height

print(" m  dim   height  2^(e+1)")
for m in range(2, 17):  # m = 1 is the circle, where SP^2 is a circle again
    ring = build_sp2(make_rp(m))
    h = phi_height(ring, ring.find("phi(1,x)"))
    print(f"{m:2d}  {len(ring):4d}  {h:6d}  {2 ** m.bit_length():7d}")

# the powers themselves, for RP^5
ring = build_sp2(make_rp(5))
g = ring.find("phi(1,x)")
power = frozenset({ring.unit})
for n in range(1, 10):
    out = set()
    for z in power:
        out ^= ring.mult.get((z, g), frozenset())
    power = frozenset(out)
    print(f"phi(1,x)^{n} =", ring.show(power))
    if not power:
        break
