"""
Mod 2 cohomology of the symmetric square SP^2(X), with Steenrod action.

Normal forms are ``Unit``, ``E(s, i)`` with ``ell <= s <= deg(b_i)`` and
``Phi(i, j)`` with ``i < j``.  Three relations are used as left-to-right
rewrites into normal form::

    phi(b_j, b_i)      -> phi(b_i, b_j)
    phi(b_i, b_i)      -> sum_{s=ell}^{deg b_i} E_s(Sq^{deg b_i - s} b_i)
    E_{deg b + k}(b)   -> sum_{s=max(k, ell)}^{deg b + k - 1} E_s(Sq^{deg b + k - s} b),  k >= 1

The last rewrite turns an element of excess ``k = s - deg b`` into terms of
excess ``2s - 2 deg b - k <= k - 2``, so it terminates.  Products and squares
are evaluated by::

    phi(a, b) phi(c, d) = phi(ac, bd) + phi(ad, bc)
    E * anything positive = 0
    Sq^k phi(a, b) = phi(Sq^k(a (x) b)) + sum_{s=ell}^k E_s(Sq^{k-s}(ab))
    Sq^k E_s(b)    = sum_{j=0}^k (s-1 choose k-j) E_{k+s-j}(Sq^j b)

and their outputs renormalized.  ``ell`` is 2 for H*(SP^2 X) and 1 for the
relative ring H*(SP^2 X, X).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Union

from .f2core import (BasisElement, PresentedAlgebra, ZERO, binom_mod2)


@dataclass(frozen=True)
class Variant:
    relative: bool = False

    @property
    def ell(self) -> int:
        return 1 if self.relative else 2


ABSOLUTE = Variant(False)
RELATIVE = Variant(True)


@dataclass(frozen=True, order=True)
class Unit:
    pass


@dataclass(frozen=True, order=True)
class E:
    s: int
    i: int

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"E_s needs s >= 1, got {self.s}")


@dataclass(frozen=True, order=True)
class Phi:
    i: int
    j: int

    def __post_init__(self):
        if not self.i < self.j:
            raise ValueError(f"Phi({self.i}, {self.j}) is not a normal form; need i < j")


SP2Element = Union[Unit, E, Phi]
SP2Vector = frozenset  # of SP2Element

_KIND_RANK = {Unit: 0, Phi: 1, E: 2}


def element_degree(A: PresentedAlgebra, z: SP2Element) -> int:
    if isinstance(z, Unit):
        return 0
    if isinstance(z, E):
        return A.degree(z.i) + z.s
    return A.degree(z.i) + A.degree(z.j)


def element_label(A: PresentedAlgebra, z: SP2Element) -> str:
    if isinstance(z, Unit):
        return "1"
    if isinstance(z, E):
        return f"E_{z.s}({A.label(z.i)})"
    return f"phi({A.label(z.i)},{A.label(z.j)})"


def sort_key(A: PresentedAlgebra, z: SP2Element):
    fields = () if isinstance(z, Unit) else ((z.s, z.i) if isinstance(z, E) else (z.i, z.j))
    return (element_degree(A, z), _KIND_RANK[type(z)], fields)


def is_normal(A: PresentedAlgebra, z: SP2Element, variant: Variant = ABSOLUTE) -> bool:
    if isinstance(z, Unit):
        return not variant.relative
    if isinstance(z, E):
        return variant.ell <= z.s <= A.degree(z.i)
    return z.i < z.j


def sp2_basis(A: PresentedAlgebra, variant: Variant = ABSOLUTE) -> list[tuple[SP2Element, int]]:
    """Normal-form basis with degrees, sorted by degree then canonical order."""
    elements: list[SP2Element] = [] if variant.relative else [Unit()]
    n = len(A)
    for i in range(n):
        for s in range(variant.ell, A.degree(i) + 1):
            elements.append(E(s, i))
        for j in range(i + 1, n):
            elements.append(Phi(i, j))
    elements.sort(key=lambda z: sort_key(A, z))
    return [(z, element_degree(A, z)) for z in elements]


def _xor_into(acc: set, terms: Iterable) -> None:
    for t in terms:
        acc ^= {t}


class SymmetricSquare:
    """Normalization and evaluation context for one input algebra and variant.

    Holds the memo tables for products and squares; instances are not shared
    between constructions.
    """

    def __init__(self, A: PresentedAlgebra, variant: Variant = ABSOLUTE):
        if A.unit is None:
            raise ValueError("the input algebra must be unital")
        self.A = A
        self.variant = variant
        self.ell = variant.ell
        self._E_memo: dict[tuple[int, int], frozenset] = {}
        self._phi_memo: dict[tuple[int, int], frozenset] = {}
        self._mult_memo: dict[tuple, frozenset] = {}
        self._sq_memo: dict[tuple, frozenset] = {}
        # called as hook(excess_before, excess_after) on every E rewrite
        self.rewrite_hook: Callable[[int, int], None] | None = None

    # -- input-algebra helpers, basis-level and cached by the table lookups
    def _sq(self, k: int, i: int) -> frozenset[int]:
        return self.A.sq.get((k, i), ZERO)

    def _mul(self, i: int, j: int) -> frozenset[int]:
        return self.A.mult.get((i, j), ZERO)

    # -- rewrites
    def norm_E(self, s: int, u: Iterable[int]) -> frozenset:
        """E_s(u), linear in u, rewritten into normal form."""
        if s < self.ell:
            raise ValueError(f"E_{s} is undefined below ell={self.ell}")
        acc: set = set()
        for i in u:
            _xor_into(acc, self._norm_E_basis(s, i))
        return frozenset(acc)

    def _norm_E_basis(self, s: int, i: int) -> frozenset:
        key = (s, i)
        if key in self._E_memo and self.rewrite_hook is None:
            return self._E_memo[key]
        d = self.A.degree(i)
        if s <= d:
            result = frozenset({E(s, i)})
        else:
            k = s - d
            acc: set = set()
            for t in range(max(k, self.ell), d + k):
                target = self._sq(d + k - t, i)
                if not target:
                    continue
                if self.rewrite_hook is not None:
                    # every term of Sq^{d+k-t} b_i has degree 2d + k - t
                    self.rewrite_hook(k, t - (2 * d + k - t))
                for c in target:
                    _xor_into(acc, self._norm_E_basis(t, c))
            result = frozenset(acc)
        self._E_memo[key] = result
        return result

    def norm_phi(self, i: int, j: int) -> frozenset:
        """phi(b_i (x) b_j) in normal form."""
        if i > j:
            i, j = j, i
        if i < j:
            return frozenset({Phi(i, j)})
        if (i, i) in self._phi_memo:
            return self._phi_memo[i, i]
        d = self.A.degree(i)
        acc: set = set()
        for s in range(self.ell, d + 1):
            _xor_into(acc, self.norm_E(s, self._sq(d - s, i)))
        self._phi_memo[i, i] = frozenset(acc)
        return self._phi_memo[i, i]

    def phi_bilinear(self, u: Iterable[int], w: Iterable[int]) -> frozenset:
        w = list(w)
        acc: set = set()
        for i in u:
            for j in w:
                _xor_into(acc, self.norm_phi(i, j))
        return frozenset(acc)

    # -- evaluation
    def mult(self, a: SP2Element, b: SP2Element) -> frozenset:
        if isinstance(a, Unit):
            return frozenset({b})
        if isinstance(b, Unit):
            return frozenset({a})
        if isinstance(a, E) or isinstance(b, E):
            return frozenset()
        key = (a, b) if (a.i, a.j) <= (b.i, b.j) else (b, a)
        if key in self._mult_memo:
            return self._mult_memo[key]
        acc: set = set()
        _xor_into(acc, self.phi_bilinear(self._mul(a.i, b.i), self._mul(a.j, b.j)))
        _xor_into(acc, self.phi_bilinear(self._mul(a.i, b.j), self._mul(a.j, b.i)))
        self._mult_memo[key] = frozenset(acc)
        return self._mult_memo[key]

    def mult_vec(self, u: Iterable[SP2Element], w: Iterable[SP2Element]) -> frozenset:
        w = list(w)
        acc: set = set()
        for a in u:
            for b in w:
                _xor_into(acc, self.mult(a, b))
        return frozenset(acc)

    def sq(self, k: int, a: SP2Element) -> frozenset:
        key = (k, a)
        if key in self._sq_memo:
            return self._sq_memo[key]
        acc: set = set()
        if k == 0:
            acc = {a}
        elif isinstance(a, Unit):
            pass
        elif isinstance(a, Phi):
            for t in range(k + 1):
                _xor_into(acc, self.phi_bilinear(self._sq(t, a.i), self._sq(k - t, a.j)))
            product_ij = self._mul(a.i, a.j)
            for s in range(self.ell, k + 1):
                c: set = set()
                for p in product_ij:
                    _xor_into(c, self._sq(k - s, p))
                _xor_into(acc, self.norm_E(s, c))
        else:
            if not is_normal(self.A, a, self.variant):
                raise ValueError(f"Sq^k on non-normal element {a}")
            for j in range(k + 1):
                if binom_mod2(a.s - 1, k - j):
                    _xor_into(acc, self.norm_E(k + a.s - j, self._sq(j, a.i)))
        self._sq_memo[key] = frozenset(acc)
        return self._sq_memo[key]

    def basis(self) -> list[tuple[SP2Element, int]]:
        return sp2_basis(self.A, self.variant)

    def label(self, z: SP2Element) -> str:
        return element_label(self.A, z)

    def show(self, u: Iterable[SP2Element]) -> str:
        terms = sorted(u, key=lambda z: sort_key(self.A, z))
        return " + ".join(self.label(z) for z in terms) if terms else "0"

    def build(self) -> PresentedAlgebra:
        elements = [z for z, _ in self.basis()]
        index = {z: n for n, z in enumerate(elements)}
        degree = {z: element_degree(self.A, z) for z in elements}
        top = 2 * self.A.top_degree
        basis = tuple(BasisElement(n, degree[z], self.label(z)) for n, z in enumerate(elements))

        def ids(v: Iterable[SP2Element]) -> frozenset[int]:
            return frozenset(index[z] for z in v)

        mult = {}
        for a in elements:
            for b in elements:
                if degree[a] + degree[b] <= top:
                    value = self.mult(a, b)
                    if value:
                        mult[index[a], index[b]] = ids(value)
        sq = {}
        for a in elements:
            for k in range(degree[a] + 1):
                if degree[a] + k > top:
                    break
                value = self.sq(k, a)
                if value:
                    sq[k, index[a]] = ids(value)
        unit = None if self.variant.relative else index[Unit()]
        prefix = "SP^2" if not self.variant.relative else "SP^2,rel"
        ring = PresentedAlgebra(f"{prefix}({self.A.name})", basis, unit, top, mult, sq)
        ring.elements = tuple(elements)
        return ring


# -- functional surface ------------------------------------------------------------


def norm_phi(A: PresentedAlgebra, i: int, j: int, variant: Variant = ABSOLUTE) -> frozenset:
    return SymmetricSquare(A, variant).norm_phi(i, j)


def norm_E(A: PresentedAlgebra, s: int, u: Iterable[int], variant: Variant = ABSOLUTE) -> frozenset:
    return SymmetricSquare(A, variant).norm_E(s, u)


def phi_bilinear(A: PresentedAlgebra, u: Iterable[int], w: Iterable[int],
                 variant: Variant = ABSOLUTE) -> frozenset:
    return SymmetricSquare(A, variant).phi_bilinear(u, w)


def sp2_mult(A: PresentedAlgebra, a: SP2Element, b: SP2Element, variant: Variant = ABSOLUTE) -> frozenset:
    return SymmetricSquare(A, variant).mult(a, b)


def sp2_sq(A: PresentedAlgebra, k: int, a: SP2Element, variant: Variant = ABSOLUTE) -> frozenset:
    return SymmetricSquare(A, variant).sq(k, a)


def build_sp2(A: PresentedAlgebra, variant: Variant = ABSOLUTE) -> PresentedAlgebra:
    """Materialize H*(SP^2 X) (or H*(SP^2 X, X)) as a presented algebra.

    Labels are ``E_s(b)`` and ``phi(b,c)``; the normal-form objects are kept
    on the result as ``ring.elements`` in basis-id order.
    """
    return SymmetricSquare(A, variant).build()


def find_phi(ring: PresentedAlgebra, a: str, b: str) -> int:
    """Basis id of phi(a (x) b) in a built ring, in either label order."""
    try:
        return ring.find(f"phi({a},{b})")
    except KeyError:
        return ring.find(f"phi({b},{a})")
