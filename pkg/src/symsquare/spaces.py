"""Standard input algebras: projective spaces, spheres and Künneth products."""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product

from .f2core import BasisElement, PresentedAlgebra, ZERO, binom_mod2, load, vec

# generator letters handed out to the factors of a parsed product, left to right
GENERATORS = "xyzwuvpqrt"


def _power_label(gen: str, i: int) -> str:
    if i == 0:
        return "1"
    return gen if i == 1 else f"{gen}^{i}"


def make_rp(m: int, gen: str = "x") -> PresentedAlgebra:
    """H*(RP^m) = F2[x]/(x^{m+1}) with Sq^s x^i = (i choose s) x^{i+s}."""
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"RP^m needs m >= 1, got {m!r}")
    basis = tuple(BasisElement(i, i, _power_label(gen, i)) for i in range(m + 1))
    mult = {(i, j): vec(i + j) for i in range(m + 1) for j in range(m + 1) if i + j <= m}
    sq = {}
    for i in range(m + 1):
        for s in range(i + 1):
            if i + s <= m and binom_mod2(i, s):
                sq[s, i] = vec(i + s)
    return PresentedAlgebra(f"RP^{m}", basis, 0, m, mult, sq)


def make_sphere(n: int, gen: str = "s") -> PresentedAlgebra:
    """Exterior algebra on one class of degree n with trivial Steenrod action."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"S^n needs n >= 1, got {n!r}")
    basis = (BasisElement(0, 0, "1"), BasisElement(1, n, gen))
    mult = {(0, 0): vec(0), (0, 1): vec(1), (1, 0): vec(1)}
    sq = {(0, 0): vec(0), (0, 1): vec(1)}
    return PresentedAlgebra(f"S^{n}", basis, 0, n, mult, sq)


def _join(a: str, b: str) -> str:
    if a == "1":
        return b
    if b == "1":
        return a
    return a + b


def make_product(A: PresentedAlgebra, B: PresentedAlgebra, name: str | None = None) -> PresentedAlgebra:
    """Künneth product H*(X) ⊗ H*(Y).

    Basis pairs are ordered lexicographically by (A-id, B-id); products are
    componentwise and Sq acts by the Cartan formula.
    """
    if A.unit is None or B.unit is None:
        raise ValueError("products need unital factors")
    pairs = list(product(range(len(A)), range(len(B))))
    index = {p: n for n, p in enumerate(pairs)}
    basis = tuple(BasisElement(n, A.degree(a) + B.degree(b), _join(A.label(a), B.label(b)))
                  for n, (a, b) in enumerate(pairs))

    def tensor(u, v):
        out: set[int] = set()
        for a in u:
            for b in v:
                out ^= {index[a, b]}
        return frozenset(out)

    mult = {}
    for (a1, b1), (a2, b2) in product(pairs, repeat=2):
        value = tensor(A.mult.get((a1, a2), ZERO), B.mult.get((b1, b2), ZERO))
        if value:
            mult[index[a1, b1], index[a2, b2]] = value
    sq = {}
    for a, b in pairs:
        for k in range(A.degree(a) + B.degree(b) + 1):
            value: frozenset[int] = ZERO
            for t in range(k + 1):
                value ^= tensor(A.sq.get((t, a), ZERO), B.sq.get((k - t, b), ZERO))
            if value:
                sq[k, index[a, b]] = value
    return PresentedAlgebra(name or f"{A.name} x {B.name}", basis, index[A.unit, B.unit],
                            A.top_degree + B.top_degree, mult, sq)


# -- descriptors -----------------------------------------------------------------


class DescriptorError(ValueError):
    """Unparseable or out-of-range space descriptor."""


@dataclass(frozen=True)
class RP:
    m: int

    def __str__(self):
        return f"rp:{self.m}"


@dataclass(frozen=True)
class Sphere:
    n: int

    def __str__(self):
        return f"sphere:{self.n}"


@dataclass(frozen=True)
class Product:
    left: "Space"
    right: "Space"

    def __str__(self):
        return f"product({self.left},{self.right})"


@dataclass(frozen=True)
class File:
    path: str

    def __str__(self):
        return f"file:{self.path}"


Space = RP | Sphere | Product | File

ALIASES = {
    "torus": "product(sphere:1,sphere:1)",
    "circle": "sphere:1",
}


def parse_space(text: str | Space) -> Space:
    """Parse ``rp:<m>``, ``sphere:<n>``, ``product(<a>,<b>)``, ``file:<path>``
    and the aliases ``torus`` and ``circle``."""
    if not isinstance(text, str):
        return text
    desc, rest = _parse(text.replace(" ", ""), 0)
    if rest != len(text.replace(" ", "")):
        raise DescriptorError(f"trailing input in space descriptor {text!r}")
    return desc


def _parse(s: str, pos: int) -> tuple[Space, int]:
    for alias, target in ALIASES.items():
        if s.startswith(alias, pos):
            end = pos + len(alias)
            if end == len(s) or s[end] in ",)":
                return parse_space(target), end
    if s.startswith("product(", pos):
        left, pos = _parse(s, pos + len("product("))
        if pos >= len(s) or s[pos] != ",":
            raise DescriptorError(f"expected ',' in {s!r}")
        right, pos = _parse(s, pos + 1)
        if pos >= len(s) or s[pos] != ")":
            raise DescriptorError(f"expected ')' in {s!r}")
        return Product(left, right), pos + 1
    if s.startswith("file:", pos):
        end = len(s)
        depth = 0
        for n in range(pos, len(s)):
            if s[n] == "(":
                depth += 1
            elif s[n] in ",)" and depth == 0:
                end = n
                break
            elif s[n] == ")":
                depth -= 1
        return File(s[pos + 5:end]), end
    match = re.compile(r"(rp|sphere):(\d+)").match(s, pos)
    if not match:
        raise DescriptorError(f"cannot parse space descriptor at {s[pos:]!r}")
    n = int(match.group(2))
    if n < 1:
        raise DescriptorError(f"{match.group(1)}:{n}: dimension must be >= 1")
    return (RP(n) if match.group(1) == "rp" else Sphere(n)), match.end()


def canonical(desc: str | Space) -> str:
    return str(parse_space(desc))


def factors(desc: str | Space) -> tuple[Space, Space] | None:
    space = parse_space(desc)
    return (space.left, space.right) if isinstance(space, Product) else None


def build_space(desc: str | Space) -> PresentedAlgebra:
    """Construct H*(X) for a descriptor."""
    space = parse_space(desc)
    letters = iter(GENERATORS)
    return _build(space, letters)


def _build(space: Space, letters) -> PresentedAlgebra:
    if isinstance(space, RP):
        return make_rp(space.m, next(letters))
    if isinstance(space, Sphere):
        return make_sphere(space.n, next(letters))
    if isinstance(space, Product):
        left = _build(space.left, letters)
        right = _build(space.right, letters)
        name = "T^2" if str(space) == ALIASES["torus"] else None
        return make_product(left, right, name)
    return load(space.path)
