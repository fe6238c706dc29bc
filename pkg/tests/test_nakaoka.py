import pytest

from symsquare.f2core import validate_algebra
from symsquare.nakaoka import (ABSOLUTE, RELATIVE, E, Phi, SymmetricSquare, Unit, build_sp2, element_label,
                               find_phi, norm_E, norm_phi, phi_bilinear, sp2_basis, sp2_mult, sp2_sq)
from symsquare.spaces import build_space, make_rp, make_sphere


def labels(A, v):
    return sorted(element_label(A, z) for z in v)


def x(A, i):
    """Basis id of x^i in RP^m."""
    return A.find("x" if i == 1 else f"x^{i}")


# -- basis -----------------------------------------------------------------------


def test_basis_rp2_is_rp4_shaped(rp):
    A = rp(2)
    basis = sp2_basis(A)
    assert [d for _, d in basis] == [0, 1, 2, 3, 4]
    assert [element_label(A, z) for z, _ in basis] == ["1", "phi(1,x)", "phi(1,x^2)", "phi(x,x^2)", "E_2(x^2)"]


def test_basis_torus(torus):
    got = {element_label(torus, z) for z, _ in sp2_basis(torus)}
    assert got == {"1", "phi(1,y)", "phi(1,x)", "phi(1,xy)", "phi(y,x)", "phi(y,xy)", "phi(x,xy)", "E_2(xy)"}


@pytest.mark.parametrize("m", range(1, 17))
def test_basis_rp_has_one_class_in_degree_one(m):
    A = make_rp(m)
    deg1 = [z for z, d in sp2_basis(A) if d == 1]
    assert deg1 == [Phi(0, 1)]


def test_basis_relative_excludes_unit(rp):
    A = rp(2)
    got = [element_label(A, z) for z, _ in sp2_basis(A, RELATIVE)]
    assert "1" not in got
    assert sorted(got) == sorted(["phi(1,x)", "E_1(x)", "phi(1,x^2)", "E_1(x^2)", "phi(x,x^2)", "E_2(x^2)"])


def test_normal_form_constructors_enforce_order():
    with pytest.raises(ValueError):
        Phi(2, 1)
    with pytest.raises(ValueError):
        Phi(1, 1)
    with pytest.raises(ValueError):
        E(0, 1)


# -- rewrites ----------------------------------------------------------------------


def test_norm_phi_diagonal_of_degree_one_vanishes(rp):
    A = rp(4)
    assert norm_phi(A, 1, 1) == frozenset()


def test_norm_phi_swaps(rp):
    A = rp(4)
    assert norm_phi(A, 3, 1) == {Phi(1, 3)}


@pytest.mark.parametrize("m", range(2, 9))
def test_norm_phi_x2_x2(m):
    A = make_rp(m)
    assert norm_phi(A, 2, 2) == {E(2, 2)}


def test_norm_phi_torus_top(torus):
    xy = torus.find("xy")
    assert norm_phi(torus, xy, xy) == {E(2, xy)}


def test_norm_phi_x3_x3(rp):
    # s=2: E_2(Sq^1 x^3) = E_2(x^4); s=3: E_3(x^3)
    A = rp(6)
    assert norm_phi(A, 3, 3) == {E(2, 4), E(3, 3)}


def test_norm_E_in_range_is_identity(rp):
    assert norm_E(rp(4), 2, [2]) == {E(2, 2)}


def test_norm_E_of_unit_vanishes(rp):
    A = rp(4)
    for s in range(2, 6):
        assert norm_E(A, s, [0]) == frozenset()
    assert norm_E(A, 1, [0], RELATIVE) == frozenset()


def test_norm_E_excess_one_hand_unrolled(rp):
    # E_3(x^2), k=1: sum_{t=2}^{2} E_t(Sq^{3-t} x^2) = E_2(Sq^1 x^2) and Sq^1 x^2 = 0
    assert norm_E(rp(4), 3, [2]) == frozenset()
    # E_4(x^3), k=1: E_2(Sq^2 x^3) + E_3(Sq^1 x^3) = E_2(x^5) + E_3(x^4)
    assert norm_E(rp(5), 4, [3]) == {E(2, 5), E(3, 4)}
    # truncated: in RP^4, x^5 = 0
    assert norm_E(rp(4), 4, [3]) == {E(3, 4)}


def test_norm_E_is_linear(rp):
    A = rp(6)
    for s in range(2, 8):
        assert norm_E(A, s, [3, 5]) == norm_E(A, s, [3]) ^ norm_E(A, s, [5])


def test_norm_E_below_ell_rejected(rp):
    with pytest.raises(ValueError):
        norm_E(rp(3), 1, [1])


def test_norm_E_measure_decreases():
    seen = []
    for desc in ["rp:8", "rp:11", "product(rp:3,rp:4)", "torus"]:
        A = build_space(desc)
        for variant in (ABSOLUTE, RELATIVE):
            ctx = SymmetricSquare(A, variant)
            ctx.rewrite_hook = lambda before, after: seen.append((before, after))
            for i in range(len(A)):
                for s in range(variant.ell, 2 * A.top_degree + 2):
                    ctx.norm_E(s, [i])
    assert seen
    assert all(after <= before - 2 for before, after in seen)


def test_phi_bilinear_examples(rp):
    A2, A3 = rp(2), rp(3)
    assert phi_bilinear(A2, [], [1, 2]) == frozenset()
    # x^4 = 0 in RP^3, so phi(1 (x) x^4) = phi(1 (x) 0)
    x4 = frozenset()
    assert phi_bilinear(A3, [0], x4) == frozenset()
    assert phi_bilinear(A2, [1], [1, 2]) == {Phi(1, 2)}


# -- products and squares -------------------------------------------------------------


def test_torus_product_of_degree_one_classes(torus):
    a, b = find_phi_z(torus, "1", "x"), find_phi_z(torus, "1", "y")
    assert labels(torus, sp2_mult(torus, a, b)) == ["phi(1,xy)", "phi(y,x)"]


def find_phi_z(A, p, q):
    i, j = sorted((A.find(p), A.find(q)))
    return Phi(i, j)


def test_E_kills_products(torus):
    xy = torus.find("xy")
    assert sp2_mult(torus, E(2, xy), find_phi_z(torus, "x", "y")) == frozenset()
    assert sp2_mult(torus, E(2, xy), E(2, xy)) == frozenset()
    assert sp2_mult(torus, Unit(), E(2, xy)) == {E(2, xy)}


@pytest.mark.parametrize("m", range(2, 9))
def test_phi1_squared(m):
    A = make_rp(m)
    assert sp2_mult(A, Phi(0, 1), Phi(0, 1)) == {Phi(0, 2)}


@pytest.mark.parametrize("m", range(2, 9))
def test_sq1_phi1(m):
    A = make_rp(m)
    assert sp2_sq(A, 1, Phi(0, 1)) == {Phi(0, 2)}


def test_sq0_is_identity(torus):
    for variant in (ABSOLUTE, RELATIVE):
        for z, _ in sp2_basis(torus, variant):
            assert sp2_sq(torus, 0, z, variant) == {z}


@pytest.mark.parametrize("desc", ["torus"] + [f"rp:{m}" for m in range(1, 9)])
@pytest.mark.parametrize("variant", [ABSOLUTE, RELATIVE])
def test_unstability_matches_products(desc, variant):
    ctx = SymmetricSquare(build_space(desc), variant)
    for z, d in ctx.basis():
        assert ctx.sq(d, z) == ctx.mult(z, z), ctx.label(z)
        assert ctx.sq(d + 1, z) == frozenset()


# -- whole rings --------------------------------------------------------------------------


def test_build_torus_table(torus):
    ring = build_sp2(torus)
    assert len(ring) == 8 and ring.top_degree == 4
    assert validate_algebra(ring) == []


def test_build_torus_triple_product_associates(torus):
    ring = build_sp2(torus)
    a, b, c = find_phi(ring, "1", "x"), find_phi(ring, "1", "y"), find_phi(ring, "x", "y")
    e2 = {ring.find("E_2(xy)")}

    def mul(u, v):
        out = set()
        for i in u:
            for j in v:
                out ^= ring.mult.get((i, j), frozenset())
        return frozenset(out)

    assert mul(mul({a}, {b}), {c}) == e2
    assert mul({a}, mul({b}, {c})) == e2


def test_build_rp2(rp):
    ring = build_sp2(rp(2))
    assert ring.poincare() == [1, 1, 1, 1, 1]


def test_build_circle():
    ring = build_sp2(make_sphere(1))
    assert [b.label for b in ring.basis] == ["1", "phi(1,s)"]
    assert [k for k in ring.mult if ring.degree(k[0]) > 0 and ring.degree(k[1]) > 0] == []


@pytest.mark.parametrize("desc", ["rp:1", "rp:2", "rp:3", "rp:5", "rp:8", "sphere:2", "sphere:3", "torus",
                                  "product(rp:2,sphere:1)", "product(torus,sphere:1)"])
@pytest.mark.parametrize("variant", [ABSOLUTE, RELATIVE])
def test_build_is_valid(desc, variant):
    ring = build_sp2(build_space(desc), variant)
    assert ring.top_degree == 2 * build_space(desc).top_degree
    assert validate_algebra(ring) == []


def test_build_degrees_homogeneous(rp):
    ring = build_sp2(rp(7))
    for (i, j), v in ring.mult.items():
        assert {ring.degree(t) for t in v} == {ring.degree(i) + ring.degree(j)}
    for (k, i), v in ring.sq.items():
        assert {ring.degree(t) for t in v} == {ring.degree(i) + k}


def _phi1_powers(m, upto):
    A = make_rp(m)
    ctx = SymmetricSquare(A)
    powers = [frozenset({Unit()})]
    for _ in range(upto):
        powers.append(ctx.mult_vec(powers[-1], {Phi(0, 1)}))
    return A, powers


@pytest.mark.parametrize("m", range(2, 17))
def test_height_law(m):
    e = m.bit_length() - 1
    h = 2 ** (e + 1)
    _, powers = _phi1_powers(m, h + 1)
    assert powers[h] and not powers[h + 1]


@pytest.mark.parametrize("m", range(2, 17))
def test_intermediate_power_law(m):
    # phi1^(2^i) = phi(1 (x) x^(2^i)) + E_(2^(i-1))(x^(2^(i-1))), out-of-range terms dropped
    A, powers = _phi1_powers(m, 16)
    for i in range(1, 5):
        p, half = 2 ** i, 2 ** (i - 1)
        want = set()
        if p <= m:
            want.add(Phi(0, p))
        if 2 <= half <= m:
            want.add(E(half, half))
        assert powers[p] == want, (m, i)


def test_relative_variant_ell_one(rp):
    A = rp(3)
    # phi(x (x) x) = E_1(Sq^0 x) when ell = 1
    assert norm_phi(A, 1, 1, RELATIVE) == {E(1, 1)}
    ring = build_sp2(A, RELATIVE)
    assert ring.unit is None
    assert validate_algebra(ring) == []
