"""
Graded algebra over F2 with a Steenrod action.

Vectors are frozensets of basis ids; addition is symmetric difference.
A :class:`PresentedAlgebra` is a finite table presentation: a graded basis,
a cup-product table and a Steenrod-square table.  Missing table entries are
zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Iterable, Mapping

F2Vector = frozenset
ZERO: frozenset[int] = frozenset()


class MalformedAlgebraError(ValueError):
    """Raised when a presentation refers to unknown ids or has a broken shape."""


def binom_mod2(n: int, k: int) -> int:
    """(n choose k) mod 2, by Lucas: odd iff the bits of k are a submask of n."""
    if k < 0 or n < 0 or k > n:
        return 0
    return int(k & ~n == 0)


def vec(*ids: int) -> frozenset[int]:
    """Build a vector from ids, cancelling repeated ids in pairs."""
    out: set[int] = set()
    for i in ids:
        out ^= {i}
    return frozenset(out)


def vec_add(u: frozenset, v: frozenset) -> frozenset:
    return u ^ v


def vec_sum(vectors: Iterable[frozenset]) -> frozenset:
    return reduce(frozenset.__xor__, vectors, ZERO)


@dataclass(frozen=True)
class BasisElement:
    id: int
    degree: int
    label: str


@dataclass(eq=False)
class PresentedAlgebra:
    """Finite presentation of a graded commutative F2-algebra with Sq action.

    ``mult`` maps ordered pairs ``(i, j)`` and ``sq`` maps ``(k, i)`` to
    vectors; only nonzero entries need to be present.  ``unit`` may be
    ``None`` for non-unital algebras (relative cohomology rings).
    """

    name: str
    basis: tuple[BasisElement, ...]
    unit: int | None
    top_degree: int
    mult: Mapping[tuple[int, int], frozenset[int]]
    sq: Mapping[tuple[int, int], frozenset[int]]
    _by_label: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.basis = tuple(self.basis)
        for n, b in enumerate(self.basis):
            if b.id != n:
                raise MalformedAlgebraError(f"basis ids must be contiguous from 0, got {b.id} at {n}")
            if b.degree < 0:
                raise MalformedAlgebraError(f"negative degree for {b.label!r}")
        if self.unit is not None and not 0 <= self.unit < len(self.basis):
            raise MalformedAlgebraError(f"unit id {self.unit} is not a basis id")
        n = len(self.basis)
        entries = [(key, key, v) for key, v in self.mult.items()]
        entries += [(key, key[1:], v) for key, v in self.sq.items()]
        for key, ids, value in entries:
            for i in (*ids, *value):
                if not 0 <= i < n:
                    raise MalformedAlgebraError(f"unknown basis id {i} in table entry {key}")
        self.mult = {k: frozenset(v) for k, v in self.mult.items() if v}
        self.sq = {k: frozenset(v) for k, v in self.sq.items() if v}
        self._by_label = {b.label: b.id for b in self.basis}

    def __len__(self) -> int:
        return len(self.basis)

    def degree(self, i: int) -> int:
        return self.basis[i].degree

    def label(self, i: int) -> str:
        return self.basis[i].label

    def find(self, label: str) -> int:
        try:
            return self._by_label[label]
        except KeyError:
            raise KeyError(f"{self.name}: no basis element labelled {label!r}") from None

    def element(self, *labels: str) -> frozenset[int]:
        return vec(*(self.find(s) for s in labels))

    def in_degree(self, d: int) -> list[int]:
        return [b.id for b in self.basis if b.degree == d]

    def poincare(self) -> list[int]:
        """Betti numbers b_0, ..., b_top."""
        dims = [0] * (self.top_degree + 1)
        for b in self.basis:
            dims[b.degree] += 1
        return dims

    def positive(self) -> list[int]:
        return [b.id for b in self.basis if b.degree > 0]

    def show(self, u: Iterable[int]) -> str:
        terms = sorted(u, key=lambda i: (self.degree(i), i))
        return " + ".join(self.label(i) for i in terms) if terms else "0"


def _check_ids(A: PresentedAlgebra, u: Iterable[int]) -> None:
    for i in u:
        if not (isinstance(i, int) and 0 <= i < len(A.basis)):
            raise MalformedAlgebraError(f"{A.name}: unknown basis id {i!r}")


def alg_mult(A: PresentedAlgebra, u: Iterable[int], v: Iterable[int]) -> frozenset[int]:
    """Bilinear extension of the product table."""
    u, v = list(u), list(v)
    _check_ids(A, u)
    _check_ids(A, v)
    return vec_sum(A.mult.get((i, j), ZERO) for i in u for j in v)


def alg_sq(A: PresentedAlgebra, k: int, u: Iterable[int]) -> frozenset[int]:
    u = list(u)
    _check_ids(A, u)
    return vec_sum(A.sq.get((k, i), ZERO) for i in u)


def homogeneous_degree(A: PresentedAlgebra, u: Iterable[int]) -> int | None:
    """Common degree of the terms of ``u``; None for zero, -1 if mixed."""
    degrees = {A.degree(i) for i in u}
    if not degrees:
        return None
    return degrees.pop() if len(degrees) == 1 else -1


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    axiom: str
    detail: str

    def __str__(self) -> str:
        return f"{self.axiom}: {self.detail}"


def validate_algebra(A: PresentedAlgebra, *, associativity: bool = True,
                     max_reports: int | None = None) -> list[Violation]:
    """Check the algebra axioms exhaustively; an empty list means valid.

    Checked: unit law, commutativity, associativity on basis triples, degree
    additivity (and vanishing above the top degree), Sq^0 = id, Sq^k = 0 above
    the degree, Sq^deg = squaring, and the Cartan formula on basis pairs.
    """
    out: list[Violation] = []
    basis = range(len(A))
    deg = A.degree
    top = A.top_degree

    def report(axiom: str, detail: str) -> bool:
        out.append(Violation(axiom, detail))
        return max_reports is not None and len(out) >= max_reports

    def mul(u, v):
        return vec_sum(A.mult.get((i, j), ZERO) for i in u for j in v)

    def sq(k, u):
        return vec_sum(A.sq.get((k, i), ZERO) for i in u)

    degree_zero = A.in_degree(0)
    if A.unit is not None:
        if degree_zero != [A.unit]:
            if report("unit", f"degree-0 part is {degree_zero}, expected only the unit {A.unit}"):
                return out
        for i in basis:
            if A.mult.get((A.unit, i), ZERO) != {i} or A.mult.get((i, A.unit), ZERO) != {i}:
                if report("unit", f"1*{A.label(i)} != {A.label(i)}"):
                    return out
    if any(b.degree > top for b in A.basis):
        if report("degree", "basis element above top degree"):
            return out

    for (i, j), value in A.mult.items():
        d = deg(i) + deg(j)
        if d > top:
            if report("degree", f"{A.label(i)}*{A.label(j)} is nonzero above top degree"):
                return out
        elif any(deg(t) != d for t in value):
            if report("degree", f"{A.label(i)}*{A.label(j)} = {A.show(value)} is not of degree {d}"):
                return out
    for (k, i), value in A.sq.items():
        if any(deg(t) != deg(i) + k for t in value):
            if report("degree", f"Sq^{k}({A.label(i)}) = {A.show(value)} is not of degree {deg(i) + k}"):
                return out

    for i, j in product(basis, repeat=2):
        if i < j and A.mult.get((i, j), ZERO) != A.mult.get((j, i), ZERO):
            if report("commutativity", f"{A.label(i)}*{A.label(j)} != {A.label(j)}*{A.label(i)}"):
                return out

    if associativity:
        by_degree = sorted(basis, key=deg)
        for a in by_degree:
            for b in by_degree:
                if deg(a) + deg(b) > top:
                    break
                ab = A.mult.get((a, b), ZERO)
                for c in by_degree:
                    if deg(a) + deg(b) + deg(c) > top:
                        break
                    left = mul(ab, (c,))
                    right = mul((a,), A.mult.get((b, c), ZERO))
                    if left != right:
                        if report("associativity", f"({A.label(a)}*{A.label(b)})*{A.label(c)} = "
                                  f"{A.show(left)} but {A.label(a)}*({A.label(b)}*{A.label(c)}) = {A.show(right)}"):
                            return out

    for i in basis:
        if A.sq.get((0, i), ZERO) != {i}:
            if report("Sq0", f"Sq^0({A.label(i)}) != {A.label(i)}"):
                return out
        if A.sq.get((deg(i), i), ZERO) != A.mult.get((i, i), ZERO):
            if report("Sq-top", f"Sq^{deg(i)}({A.label(i)}) != {A.label(i)}^2"):
                return out
    for (k, i) in A.sq:
        if k > deg(i):
            if report("unstability", f"Sq^{k}({A.label(i)}) nonzero above degree"):
                return out

    for a in basis:
        for b in basis:
            if b < a or deg(a) + deg(b) > top:
                continue
            ab = A.mult.get((a, b), ZERO)
            for k in range(1, deg(a) + deg(b) + 1):
                if deg(a) + deg(b) + k > top:
                    break
                left = sq(k, ab)
                right = vec_sum(mul(A.sq.get((t, a), ZERO), A.sq.get((k - t, b), ZERO))
                                for t in range(k + 1))
                if left != right:
                    if report("Cartan", f"Sq^{k}({A.label(a)}*{A.label(b)}) = {A.show(left)} "
                              f"but the Cartan sum is {A.show(right)}"):
                        return out
    return out


# -- JSON presentation ----------------------------------------------------------


def to_json(A: PresentedAlgebra) -> dict:
    return {
        "name": A.name,
        "topDegree": A.top_degree,
        "basis": [{"id": b.id, "label": b.label, "degree": b.degree} for b in A.basis],
        "unit": A.unit,
        "mult": [[i, j, sorted(v)] for (i, j), v in sorted(A.mult.items())],
        "sq": [[k, i, sorted(v)] for (k, i), v in sorted(A.sq.items())],
    }


def from_json(doc: Mapping) -> PresentedAlgebra:
    try:
        basis = sorted((BasisElement(int(b["id"]), int(b["degree"]), str(b["label"]))
                        for b in doc["basis"]), key=lambda b: b.id)
        mult: dict[tuple[int, int], frozenset[int]] = {}
        for i, j, ids in doc.get("mult", []):
            mult[int(i), int(j)] = vec(*map(int, ids))
        sq: dict[tuple[int, int], frozenset[int]] = {}
        for k, i, ids in doc.get("sq", []):
            sq[int(k), int(i)] = vec(*map(int, ids))
        unit = doc.get("unit")
        top = doc.get("topDegree", max((b.degree for b in basis), default=0))
        return PresentedAlgebra(str(doc.get("name", "X")), tuple(basis),
                                None if unit is None else int(unit), int(top), mult, sq)
    except MalformedAlgebraError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedAlgebraError(f"bad ring presentation: {exc!r}") from exc


def dumps(A: PresentedAlgebra, indent: int | None = None) -> str:
    return json.dumps(to_json(A), sort_keys=True, indent=indent)


def loads(text: str) -> PresentedAlgebra:
    return from_json(json.loads(text))


def load(path) -> PresentedAlgebra:
    with open(path) as fh:
        return from_json(json.load(fh))


def same_tables(A: PresentedAlgebra, B: PresentedAlgebra) -> bool:
    """Table identity: same basis, unit, top degree and nonzero entries."""
    return (A.basis == B.basis and A.unit == B.unit and A.top_degree == B.top_degree
            and dict(A.mult) == dict(B.mult) and dict(A.sq) == dict(B.sq))
