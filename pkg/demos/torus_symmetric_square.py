"""Walk through H*(SP^2 T^2): basis, products and Steenrod squares."""

from symsquare import build_sp2, build_space
from symsquare.bounds import cup_length_witness
from symsquare.nakaoka import find_phi

torus = build_space("torus")
print(torus.name, "basis:", [b.label for b in torus.basis])

ring = build_sp2(torus)
print(ring.name, "Poincare series", ring.poincare())  # 1 + 2t + 2t^2 + 2t^3 + t^4

a = find_phi(ring, "1", "x")
b = find_phi(ring, "1", "y")
ab = ring.mult[a, b]
print("phi(1,x) * phi(1,y) =", ring.show(ab))

# degree one classes square to zero, so the longest nonzero product has length 3
n, witness = cup_length_witness(ring)
print("cup-length", n, "via", " * ".join(ring.label(i) for i in witness))

# the top class is E_2(xy), the image of xy (x) xy
top = ring.find("E_2(xy)")
for (i, j), v in sorted(ring.mult.items()):
    if i < j and v == {top} and ring.degree(i) == 1:
        print(f"  {ring.label(i)} * {ring.label(j)} = E_2(xy)")

for (k, i), v in sorted(ring.sq.items()):
    if k:
        print(f"Sq^{k} {ring.label(i)} = {ring.show(v)}")
