"""
Cup-length and interval propagation for TC-type invariants.

Invariants are tracked as integer intervals per (space, kind).  Seed facts
come from the knowledge base and from cup-length computations on symmetric
squares; :func:`propagate` closes them under the inequality rules below and
records every tightening in a :class:`DerivationTrace`.

Conventions: sectional category is reduced (a fibration with a section has
secat 0) and TC^S carries its "+1"; every fact is stored as stated.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .f2core import PresentedAlgebra
from .nakaoka import build_sp2
from .spaces import RP, Product, build_space, canonical, parse_space


class InvariantKind(enum.Enum):
    TC = "TC"
    TCS = "TCS"
    TCSigma = "TCSigma"
    Imm = "Imm"
    Emb = "Emb"
    SB = "sb"
    SBbar = "sbbar"
    CupSP2 = "cupSP2"

    def pretty(self, space: str) -> str:
        symbol = {"TCS": "TC^S", "TCSigma": "TC^Sigma", "sbbar": "sb-bar", "cupSP2": "cup(SP^2)"}
        name = symbol.get(self.value, self.value)
        match = re.fullmatch(r"rp:(\d+)", space)
        if self in (InvariantKind.SB, InvariantKind.SBbar) and match:
            return f"{name}({match.group(1)})"
        return f"{name}({space})"


K = InvariantKind


@dataclass(frozen=True)
class Interval:
    lo: int = 0
    hi: int | None = None  # None: unbounded

    @property
    def empty(self) -> bool:
        return self.hi is not None and self.lo > self.hi

    @property
    def point(self) -> int | None:
        return self.lo if self.hi == self.lo else None

    def __and__(self, other: "Interval") -> "Interval":
        his = [h for h in (self.hi, other.hi) if h is not None]
        return Interval(max(self.lo, other.lo), min(his) if his else None)

    def __contains__(self, n: int) -> bool:
        return self.lo <= n and (self.hi is None or n <= self.hi)

    def __str__(self) -> str:
        if self.empty:
            return f"EMPTY [{self.lo}, {self.hi}]"
        if self.point is not None:
            return f"= {self.lo}"
        return f"[{self.lo}, {'inf)' if self.hi is None else f'{self.hi}]'}"


TOP = Interval()


@dataclass(frozen=True)
class Fact:
    space: str
    kind: InvariantKind
    interval: Interval
    citation: str
    guard: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "space", canonical(self.space))

    def __str__(self) -> str:
        text = f"{self.kind.pretty(self.space)} {self.interval}"
        return text + (f" when {self.guard}" if self.guard else "")


def exactly(space: str, kind: InvariantKind, n: int, citation: str, guard: str | None = None) -> Fact:
    return Fact(space, kind, Interval(n, n), citation, guard)


def at_least(space, kind, n, citation, guard=None) -> Fact:
    return Fact(space, kind, Interval(n, None), citation, guard)


def at_most(space, kind, n, citation, guard=None) -> Fact:
    return Fact(space, kind, Interval(0, n), citation, guard)


# -- cup-length ---------------------------------------------------------------------


def _as_mask(u: Iterable[int]) -> int:
    mask = 0
    for i in u:
        mask |= 1 << i
    return mask


def _product_mask(A: PresentedAlgebra, mask: int, b: int) -> int:
    out = 0
    while mask:
        low = mask & -mask
        i = low.bit_length() - 1
        mask ^= low
        out ^= _as_mask(A.mult.get((i, b), ()))
    return out


def cup_length_witness(A: PresentedAlgebra) -> tuple[int, tuple[int, ...]]:
    """Cup-length with a witnessing sequence of basis ids.

    Works with the powers I^n of the positive-degree ideal: I^{n+1} is spanned
    by products v*b for v in a spanning set of I^n and b a positive basis
    element.  Spanning sets are kept as genuine products of basis elements so
    every stored vector carries its factor list.
    """
    positive = A.positive()
    if not positive:
        return 0, ()
    level = [(1 << b, (b,)) for b in positive]
    length, witness = 1, level[0][1]
    while True:
        pivots: dict[int, int] = {}
        nxt = []
        for mask, factors in level:
            for b in positive:
                prod = _product_mask(A, mask, b)
                reduced = prod
                while reduced:
                    top = reduced.bit_length() - 1
                    if top not in pivots:
                        break
                    reduced ^= pivots[top]
                if reduced:
                    pivots[reduced.bit_length() - 1] = reduced
                    nxt.append((prod, factors + (b,)))
        if not nxt:
            return length, witness
        level = nxt
        length += 1
        witness = nxt[0][1]


def cup_length(A: PresentedAlgebra) -> int:
    return cup_length_witness(A)[0]


def phi_height(ring: PresentedAlgebra, generator: int) -> int:
    """Largest n with generator^n != 0 (0 if the generator itself is zero)."""
    power, n = 1 << generator, 1
    while True:
        nxt = _product_mask(ring, power, generator)
        if not nxt:
            return n
        power, n = nxt, n + 1


@lru_cache(maxsize=64)
def sp2_of(space: str) -> PresentedAlgebra:
    return build_sp2(build_space(space))


CUP_CITATION = "TC^Sigma(X) is bounded from below by the mod 2 cup-length of SP^2(X)"
HEIGHT_CITATION = ("a symmetric axial map RP^m x RP^m -> RP^n factors through SP^2(RP^m) "
                   "pulling x back to phi(1,x), so n >= height of phi(1,x)")


def cup_sp2_fact(space) -> Fact:
    space = canonical(space)
    return exactly(space, K.CupSP2, cup_length(sp2_of(space)), "cup-length of SP^2 computed from Nakaoka's relations")


def tcsigma_lower(space) -> Fact:
    """TC^Sigma(X) >= cup-length of H*(SP^2 X)."""
    space = canonical(space)
    return at_least(space, K.TCSigma, cup_length(sp2_of(space)), CUP_CITATION)


def sb_lower(space) -> Fact:
    """sb(m) >= height of phi(1 (x) x) in H*(SP^2 RP^m)."""
    space = canonical(space)
    parsed = parse_space(space)
    if not isinstance(parsed, RP):
        raise ValueError(f"sb is only defined for projective spaces, not {space}")
    ring = sp2_of(space)
    return at_least(space, K.SB, phi_height(ring, ring.find("phi(1,x)")), HEIGHT_CITATION)


# -- guards -------------------------------------------------------------------------

_SET_GUARD = re.compile(r"m\s+(not\s+in|in)\s+\{([\d,\s]*)\}")
_CMP_GUARD = re.compile(r"m\s*(<=|>=|==|!=|<|>)\s*(\d+)")
_METASTABLE = re.compile(r"(metastable|2\s*\*?\s*sb\(m\)\s*>\s*3\s*\*?\s*m)")
_CMP = {"<=": int.__le__, ">=": int.__ge__, "==": int.__eq__, "!=": int.__ne__,
        "<": int.__lt__, ">": int.__gt__}


class GuardError(ValueError):
    pass


def guard_holds(guard: str | None, space: str, lookup: Callable[[str, InvariantKind], Interval]) -> bool:
    """Evaluate a guard such as ``m not in {6,7}`` or ``2*sb(m) > 3*m``.

    Guards talk about the m of an ``rp:m`` space and are false elsewhere.  The
    metastable condition holds only once the current lower bound for sb(m)
    certifies it.
    """
    if guard is None:
        return True
    match = re.fullmatch(r"rp:(\d+)", space)
    if not match:
        return False
    m = int(match.group(1))
    for clause in guard.split(" and "):
        clause = clause.strip()
        if found := _SET_GUARD.fullmatch(clause):
            members = {int(t) for t in found.group(2).split(",") if t.strip()}
            if (m in members) != (found.group(1) == "in"):
                return False
        elif found := _CMP_GUARD.fullmatch(clause):
            if not _CMP[found.group(1)](m, int(found.group(2))):
                return False
        elif _METASTABLE.fullmatch(clause):
            if not 2 * lookup(space, K.SB).lo > 3 * m:
                return False
        else:
            raise GuardError(f"unsupported guard clause {clause!r}")
    return True


# -- rules --------------------------------------------------------------------------

Var = tuple  # (space, InvariantKind)


@dataclass(frozen=True)
class Constraint:
    """One directed bound: ``target.side`` is tightened to ``bound(sources)``."""

    rule: str
    citation: str
    target: Var
    side: str  # "lo" or "hi"
    sources: tuple[Var, ...]
    bound: Callable[..., int | None] = field(compare=False)
    guard: str | None = None

    def evaluate(self, intervals: Sequence[Interval]) -> int | None:
        return self.bound(*intervals)


def _lo(x: Interval, shift: int = 0) -> int:
    return max(0, x.lo + shift)


def _hi(x: Interval, shift: int = 0) -> int | None:
    return None if x.hi is None else x.hi + shift


def _le(rule, citation, small: Var, big: Var, slack: int = 0, guard=None) -> list[Constraint]:
    """small <= big + slack, as two directed bounds."""
    return [
        Constraint(rule, citation, small, "hi", (big,), lambda b: _hi(b, slack), guard),
        Constraint(rule, citation, big, "lo", (small,), lambda s: _lo(s, -slack), guard),
    ]


def _eq(rule, citation, a: Var, b: Var, guard=None) -> list[Constraint]:
    return _le(rule, citation, a, b, 0, guard) + _le(rule, citation, b, a, 0, guard)


TCS_WINDOW = "TC^S(X)-1 <= TC^Sigma(X) <= TC^S(X)"
TC_LE = "TC(X) <= TC^Sigma(X) <= TC^S(X)"
CHAIN = "sb(m) <= sb-bar(m) = TC^Sigma(RP^m) <= TC^S(RP^m) <= Emb(RP^m)"
TCS_EMB = "TC^S(RP^m) = Emb(RP^m), except possibly for m in {6,7,11,12,14,15}"
SB_EMB = "Emb(RP^m)-1 <= sb(m) <= Emb(RP^m), the first inequality in the metastable range 2 sb(m) > 3m"
SB_EMB_KNOWN = "sb(m) >= Emb(RP^m)-1 for all m except possibly m in {5,6,7,9,11,12,15}"
SB_TCS_KNOWN = "sb(m) >= TC^S(RP^m)-2 for all m except possibly m = 12"
TC_IMM = "TC(RP^m) = Imm(RP^m) for RP^m not parallelizable, m not in {1,3,7}"
PRODUCT_INEQ = "TC^Sigma(X x Y) <= TC^Sigma(X) + TC^Sigma(Y)"


def rules_for(space: str, products: dict[str, tuple[str, str]]) -> list[Constraint]:
    """All constraint instances attached to one space."""
    v = lambda kind: (space, kind)  # noqa: E731
    out: list[Constraint] = []
    out += _le("tcs-window", TCS_WINDOW, v(K.TCSigma), v(K.TCS))
    out += _le("tcs-window", TCS_WINDOW, v(K.TCS), v(K.TCSigma), 1)
    out += _le("tc<=tcsigma", TC_LE, v(K.TC), v(K.TCSigma))
    out += _le("cup-length", CUP_CITATION, v(K.CupSP2), v(K.TCSigma))[1:]
    if isinstance(parse_space(space), RP):
        out += _le("chain", CHAIN, v(K.SB), v(K.SBbar))
        out += _eq("chain", CHAIN, v(K.SBbar), v(K.TCSigma))
        out += _le("chain", CHAIN, v(K.TCS), v(K.Emb))
        out += _eq("tcs=emb", TCS_EMB, v(K.TCS), v(K.Emb), "m not in {6,7,11,12,14,15}")
        out += _le("sb<=emb", SB_EMB, v(K.SB), v(K.Emb))
        out += _le("sb-metastable", SB_EMB, v(K.Emb), v(K.SB), 1, "2*sb(m) > 3*m")
        out += _le("sb>=emb-1", SB_EMB_KNOWN, v(K.Emb), v(K.SB), 1, "m not in {5,6,7,9,11,12,15}")
        out += _le("sb>=tcs-2", SB_TCS_KNOWN, v(K.TCS), v(K.SB), 2, "m not in {12}")
        out += _eq("tc=imm", TC_IMM, v(K.TC), v(K.Imm), "m not in {1,3,7}")
    if space in products:
        x, y = products[space]
        p, fx, fy = v(K.TCSigma), (x, K.TCSigma), (y, K.TCSigma)
        out.append(Constraint("product", PRODUCT_INEQ, p, "hi", (fx, fy),
                              lambda a, b: None if a.hi is None or b.hi is None else a.hi + b.hi))
        out.append(Constraint("product", PRODUCT_INEQ, fx, "lo", (p, fy),
                              lambda q, b: None if b.hi is None else max(0, q.lo - b.hi)))
        if x == y:
            out.append(Constraint("product", PRODUCT_INEQ, fx, "lo", (p,), lambda q: math.ceil(q.lo / 2)))
        else:
            out.append(Constraint("product", PRODUCT_INEQ, fy, "lo", (p, fx),
                                  lambda q, a: None if a.hi is None else max(0, q.lo - a.hi)))
    return out


# -- propagation ----------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    """One tightening: a seed fact or a rule application."""

    rule: str
    citation: str
    inputs: tuple[tuple[Var, Interval], ...]
    target: Var
    bound: Interval
    result: Interval
    constraint: Constraint | None = field(default=None, compare=False)
    fact: Fact | None = None

    def describe(self) -> str:
        space, kind = self.target
        if self.fact is not None:
            return f"{kind.pretty(space)} {self.bound}  [fact: {self.citation}]"
        used = ", ".join(f"{k.pretty(s)} {iv}" for (s, k), iv in self.inputs)
        return f"{kind.pretty(space)} {self.result}  [{self.rule}: {self.citation}; from {used}]"


@dataclass(frozen=True)
class Conflict:
    target: Var
    lower: Step
    upper: Step

    def __str__(self) -> str:
        space, kind = self.target
        return (f"inconsistent {kind.pretty(space)}: lower bound {self.lower.result.lo} "
                f"from ({self.lower.describe()}) collides with upper bound {self.upper.result.hi} "
                f"from ({self.upper.describe()})")


class ReplayError(AssertionError):
    pass


@dataclass
class DerivationTrace:
    steps: list[Step] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def replay(self) -> dict[Var, Interval]:
        """Re-derive every interval from the recorded steps.

        Each rule step is re-evaluated on the recorded inputs, which must match
        the replayed state at that point; raises :class:`ReplayError` otherwise.
        """
        state: dict[Var, Interval] = {}
        for n, step in enumerate(self.steps):
            for var, seen in step.inputs:
                if state.get(var, TOP) != seen:
                    raise ReplayError(f"step {n}: input {var} is {state.get(var, TOP)}, trace says {seen}")
            if step.constraint is not None:
                value = step.constraint.evaluate([iv for _, iv in step.inputs])
                bound = Interval(value, None) if step.constraint.side == "lo" else Interval(0, value)
                if bound != step.bound:
                    raise ReplayError(f"step {n}: rule {step.rule} gives {bound}, trace says {step.bound}")
            new = state.get(step.target, TOP) & step.bound
            if new != step.result:
                raise ReplayError(f"step {n}: replay gives {new}, trace says {step.result}")
            state[step.target] = new
        return state

    def explain(self, var: Var, upto: int | None = None, indent: int = 0, seen=None) -> list[str]:
        """Derivation tree for the interval of ``var`` as of step ``upto``."""
        seen = set() if seen is None else seen
        upto = len(self.steps) if upto is None else upto
        lines: list[str] = []
        chosen = []
        for side in ("lo", "hi"):
            for n in range(upto - 1, -1, -1):
                step = self.steps[n]
                if step.target == var and _sets(step, side):
                    if n not in chosen:
                        chosen.append(n)
                    break
        for n in sorted(chosen):
            step = self.steps[n]
            if n in seen:
                lines.append("  " * indent + step.describe() + "  (see above)")
                continue
            seen.add(n)
            lines.append("  " * indent + step.describe())
            for dep, _ in step.inputs:
                lines += self.explain(dep, n, indent + 1, seen)
        return lines


def _sets(step: Step, side: str) -> bool:
    if side == "lo":
        return step.bound.lo > 0 and step.result.lo == step.bound.lo
    return step.bound.hi is not None and step.result.hi == step.bound.hi


@dataclass
class Propagation:
    intervals: dict[Var, Interval]
    trace: DerivationTrace
    conflicts: list[Conflict]

    def get(self, space, kind: InvariantKind) -> Interval:
        return self.intervals.get((canonical(space), kind), TOP)

    @property
    def consistent(self) -> bool:
        return not self.conflicts

    @property
    def facts(self) -> set[Fact]:
        return {Fact(space, kind, iv, "derived") for (space, kind), iv in self.intervals.items() if iv != TOP}

    def report(self, space) -> dict[InvariantKind, Interval]:
        space = canonical(space)
        return {kind: iv for (s, kind), iv in sorted(self.intervals.items(), key=lambda t: t[0][1].value)
                if s == space}


def _collect_spaces(kb: Iterable[Fact]) -> tuple[list[str], dict[str, tuple[str, str]]]:
    spaces: list[str] = []
    products: dict[str, tuple[str, str]] = {}

    def add(space):
        space = canonical(space)
        if space in spaces:
            return
        spaces.append(space)
        parsed = parse_space(space)
        if isinstance(parsed, Product):
            products[space] = (str(parsed.left), str(parsed.right))
            add(parsed.left)
            add(parsed.right)

    for fact in kb:
        add(fact.space)
    return spaces, products


def propagate(kb: Iterable[Fact], *, check_guards: bool = True, max_rounds: int = 1000) -> Propagation:
    """Least fixpoint of interval intersection under the inequality rules.

    Facts whose guard is false for their space are skipped.  An empty
    interval is recorded as a :class:`Conflict` naming the two colliding
    steps, and that variable is frozen so the loop still terminates.
    """
    kb = list(kb)
    spaces, products = _collect_spaces(kb)
    state: dict[Var, Interval] = {}
    trace = DerivationTrace()
    conflicts: list[Conflict] = []
    frozen: set[Var] = set()
    lookup = lambda space, kind: state.get((space, kind), TOP)  # noqa: E731

    def apply(target: Var, bound: Interval, **step_fields) -> bool:
        if target in frozen:
            return False
        old = state.get(target, TOP)
        new = old & bound
        if new == old:
            return False
        step = Step(target=target, bound=bound, result=new, **step_fields)
        trace.steps.append(step)
        state[target] = new
        if new.empty:
            frozen.add(target)
            lower = next(s for s in reversed(trace.steps) if s.target == target and _sets(s, "lo"))
            upper = next(s for s in reversed(trace.steps) if s.target == target and _sets(s, "hi"))
            conflicts.append(Conflict(target, lower, upper))
        return True

    for fact in kb:
        if check_guards and not guard_holds(fact.guard, fact.space, lookup):
            continue
        apply((fact.space, fact.kind), fact.interval, rule="fact", citation=fact.citation,
              inputs=(), fact=fact)

    constraints = [c for space in spaces for c in rules_for(space, products)]
    for _ in range(max_rounds):
        changed = False
        for c in constraints:
            if check_guards and not guard_holds(c.guard, c.target[0], lookup):
                continue
            inputs = tuple((var, state.get(var, TOP)) for var in c.sources)
            if any(iv.empty for _, iv in inputs):
                continue  # already reported; do not spread the contradiction
            value = c.evaluate([iv for _, iv in inputs])
            if value is None:
                continue
            bound = Interval(value, None) if c.side == "lo" else Interval(0, value)
            changed |= apply(c.target, bound, rule=c.rule, citation=c.citation,
                             inputs=inputs, constraint=c)
        if not changed:
            break
    else:
        raise RuntimeError(f"propagation did not converge in {max_rounds} rounds")
    return Propagation(state, trace, conflicts)


# -- knowledge base ---------------------------------------------------------------------

WELL_KNOWN_EMB = "Emb(RP^{2^e}) = 2^{e+1} is well known"
TC_IMM_VALUES = "TC(RP^{2^e}) = Imm(RP^{2^e}) = 2^{e+1}-1, for e >= 1"
SURFACES = "all closed surfaces have TC^S <= 4"


def kb_default(max_e: int = 4) -> list[Fact]:
    """Seed facts quoted from the literature, for RP^{2^e} with 1 <= e <= max_e.

    Only premises are included; the values the propagation is meant to derive
    (TC^Sigma, TC^S, sb, sb-bar of RP^{2^e}, TC^Sigma(S^1)) are not.  See
    :func:`reference_values` for those.
    """
    facts: list[Fact] = []
    for e in range(1, max_e + 1):
        m = f"rp:{2 ** e}"
        facts.append(exactly(m, K.Emb, 2 ** (e + 1), WELL_KNOWN_EMB))
        facts.append(exactly(m, K.TC, 2 ** (e + 1) - 1, TC_IMM_VALUES))
        facts.append(exactly(m, K.Imm, 2 ** (e + 1) - 1, TC_IMM_VALUES))
    facts.append(exactly("sphere:1", K.TCS, 2, "TC^S(S^1) = 2"))
    for surface in ("torus", "rp:2", "sphere:2"):
        facts.append(at_most(surface, K.TCS, 4, SURFACES))
    facts.append(exactly("rp:1", K.SB, 1, "sb(1) = 1 (multiplication of unit complex numbers)"))
    return facts


def reference_values(max_e: int = 3) -> list[Fact]:
    """Reference values from the literature, used to check derived results, never as seeds."""
    claims = []
    for e in range(1, max_e + 1):
        m = f"rp:{2 ** e}"
        for kind in (K.Emb, K.TCS, K.TCSigma, K.SBbar, K.SB):
            claims.append(exactly(m, kind, 2 ** (e + 1), "all three chain inequalities are sharp for m = 2^e"))
    claims.append(exactly("sphere:1", K.TCSigma, 2, "TC^Sigma(S^1) = 2"))
    return claims


def lower_bound_facts(space, kb: Iterable[Fact] = (), *, max_top_degree: int = 32) -> list[Fact]:
    """Computed cup-length seeds for ``space`` and the spaces linked to it.

    Linked spaces are registered products in ``kb`` having ``space`` as a
    factor, and the factors of ``space`` itself.
    """
    space = canonical(space)
    wanted = [space]
    spaces, products = _collect_spaces(list(kb) + [at_least(space, K.TC, 0, "query")])
    for prod, pair in products.items():
        if space in pair or prod == space:
            wanted += [prod, *pair]
    out = []
    for s in dict.fromkeys(wanted):
        if build_space(s).top_degree * 2 > max_top_degree:
            continue
        out.append(tcsigma_lower(s))
        if isinstance(parse_space(s), RP):
            out.append(sb_lower(s))
    return out


# -- KB file format ------------------------------------------------------------------------


class KBFormatError(ValueError):
    pass


def fact_to_json(fact: Fact) -> dict:
    doc = {"space": fact.space, "kind": fact.kind.value, "lo": fact.interval.lo,
           "hi": fact.interval.hi, "citation": fact.citation}
    if fact.guard:
        doc["guard"] = fact.guard
    return doc


def dumps_kb(facts: Iterable[Fact]) -> str:
    return json.dumps([fact_to_json(f) for f in facts], indent=1, sort_keys=True)


def loads_kb(text: str) -> list[Fact]:
    """Parse a JSON list of ``{space, kind, lo, hi, guard?, citation}`` records."""
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KBFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(records, list):
        raise KBFormatError("line 1: expected a JSON list of fact records")
    facts = []
    kinds = {k.value.lower(): k for k in InvariantKind} | {k.name.lower(): k for k in InvariantKind}
    for n, rec in enumerate(records):
        where = f"record {n}"
        try:
            kind = kinds[str(rec["kind"]).lower()]
            lo = int(rec.get("lo", 0) or 0)
            hi = rec.get("hi")
            hi = None if hi is None else int(hi)
            guard = rec.get("guard")
            if guard is not None:
                guard_holds(guard, "rp:1", lambda s, k: TOP)
            facts.append(Fact(str(rec["space"]), kind, Interval(lo, hi), str(rec.get("citation", "user")), guard))
        except KeyError as exc:
            raise KBFormatError(f"{where}: missing or unknown field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise KBFormatError(f"{where}: {exc}") from exc
    return facts


def load_kb(path) -> list[Fact]:
    with open(path) as fh:
        return loads_kb(fh.read())
