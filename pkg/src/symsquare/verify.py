"""Golden checks reproducing the reference computations, one result per check."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterator

from .bounds import (InvariantKind as K, Interval, cup_length, kb_default, lower_bound_facts,
                     reference_values, propagate, sp2_of)
from .f2core import binom_mod2, validate_algebra
from .nakaoka import ABSOLUTE, RELATIVE, SymmetricSquare, build_sp2, find_phi
from .spaces import build_space, make_rp


@dataclass(frozen=True)
class CheckResult:
    group: str
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.group}/{self.name} ({self.seconds:.2f}s){': ' + self.detail if self.detail else ''}"


def _timed(fn, *args):
    start = time.perf_counter()
    value = fn(*args)
    return value, time.perf_counter() - start


# -- torus ------------------------------------------------------------------------------


def _torus_products():
    ring = build_sp2(build_space("torus"))
    ids = {name: find_phi(ring, *name.split("|")) for name in ("1|x", "1|y", "1|xy", "x|y")}
    e2 = ring.find("E_2(xy)")

    def mul(*factors):
        acc = frozenset({ring.unit})
        for f in factors:
            acc = _mul(ring, acc, ids[f])
        return acc

    return ring, ids, e2, mul


def _mul(ring, u, b):
    out: set = set()
    for a in u:
        out ^= ring.mult.get((a, b), frozenset())
    return frozenset(out)


def check_torus() -> Iterator[CheckResult]:
    start = time.perf_counter()
    ring, ids, e2, mul = _torus_products()
    listed = {
        "phi(1,x)phi(1,y) = phi(1,xy) + phi(x,y)": (mul("1|x", "1|y"), frozenset({ids["1|xy"], ids["x|y"]})),
        "phi(1,xy)^2 = E_2(xy)": (mul("1|xy", "1|xy"), frozenset({e2})),
        "phi(x,y)^2 = E_2(xy)": (mul("x|y", "x|y"), frozenset({e2})),
        "phi(1,x)phi(1,y)phi(x,y) = E_2(xy)": (mul("1|x", "1|y", "x|y"), frozenset({e2})),
        "phi(1,x)phi(1,y)phi(1,xy) = E_2(xy)": (mul("1|x", "1|y", "1|xy"), frozenset({e2})),
    }
    seconds = time.perf_counter() - start
    bad = [name for name, (got, want) in listed.items() if got != want]
    yield CheckResult("torus", "basis", len(ring) == 8 and ring.poincare() == [1, 2, 2, 2, 1],
                      f"{len(ring)} elements, Poincare {ring.poincare()}", seconds)
    yield CheckResult("torus", "listed-products", not bad and seconds < 1.0,
                      "mismatch: " + "; ".join(bad) if bad else "all five listed identities hold", seconds)
    # the reference table lists these binary products as the only nonzero ones
    allowed = {frozenset({ids["1|x"], ids["1|y"]}), frozenset({ids["1|xy"]}), frozenset({ids["x|y"]})}
    extra = sorted(f"{ring.label(i)}*{ring.label(j)} = {ring.show(v)}"
                   for (i, j), v in ring.mult.items()
                   if i <= j and ring.degree(i) > 0 and ring.degree(j) > 0 and frozenset({i, j}) not in allowed)
    yield CheckResult("torus", "no-other-products", not extra,
                      f"{len(extra)} further nonzero products, e.g. {', '.join(extra[:3])}" if extra else
                      "no further nonzero products", seconds)


# -- height of phi(1,x) -----------------------------------------------------------------------


def phi1_powers(m: int) -> tuple[object, list[frozenset]]:
    ring = build_sp2(make_rp(m))
    g = ring.find("phi(1,x)")
    powers = [frozenset({ring.unit}), frozenset({g})]
    while powers[-1]:
        powers.append(_mul(ring, powers[-1], g))
    return ring, powers


def check_altura(max_m: int = 16) -> Iterator[CheckResult]:
    start = time.perf_counter()
    failures = []
    for m in range(2, max_m + 1):
        e = m.bit_length() - 1
        ring, powers = phi1_powers(m)
        h = 2 ** (e + 1)
        if len(ring.in_degree(1)) != 1:
            failures.append(f"m={m}: dim H^1 = {len(ring.in_degree(1))}")
        if not (len(powers) > h + 1 and powers[h] and not powers[h + 1]):
            failures.append(f"m={m}: phi1^{h} = {ring.show(powers[h]) if h < len(powers) else 0}")
        for i in range(1, e + 2):
            want = set()
            p = 2 ** i
            if p <= m:
                want.add(ring.find(f"phi(1,x^{p})"))
            half = 2 ** (i - 1)
            if 2 <= half <= m:
                want.add(ring.find(f"E_{half}(x^{half})"))
            if powers[p] != frozenset(want):
                failures.append(f"m={m}: phi1^{p} = {ring.show(powers[p])}")
    seconds = time.perf_counter() - start
    ok = not failures and seconds < 10.0
    yield CheckResult("altura", f"height-law-m2..{max_m}", ok,
                      "; ".join(failures) if failures else f"phi1 height is 2^(e+1) for all m <= {max_m}", seconds)


# -- SP^2(RP^2) = RP^4 ---------------------------------------------------------------------------


def check_sp2p2() -> Iterator[CheckResult]:
    (ring, seconds) = _timed(build_sp2, make_rp(2))
    c, cs = _timed(cup_length, ring)
    ok = ring.poincare() == [1, 1, 1, 1, 1] and c == 4 and seconds + cs < 1.0
    yield CheckResult("sp2p2", "rp4", ok, f"Poincare {ring.poincare()}, cup-length {c}", seconds + cs)


# -- bounds -----------------------------------------------------------------------------------


def check_rp_powers(max_e: int = 3) -> Iterator[CheckResult]:
    start = time.perf_counter()
    kb = kb_default(max_e)
    seeds = list(kb)
    for e in range(1, max_e + 1):
        seeds += lower_bound_facts(f"rp:{2 ** e}", kb)
    result = propagate(seeds)
    replayed = result.trace.replay() == result.intervals
    seconds = time.perf_counter() - start
    for e in range(1, max_e + 1):
        m = f"rp:{2 ** e}"
        got = {kind: result.get(m, kind) for kind in (K.Emb, K.TCS, K.TCSigma, K.SBbar, K.SB)}
        got[K.CupSP2] = Interval(*[cup_length(sp2_of(m))] * 2)
        ok = all(iv.point == 2 ** (e + 1) for iv in got.values()) and replayed and result.consistent
        ok &= all(result.get(f.space, f.kind) == f.interval for f in reference_values(max_e) if f.space == m)
        yield CheckResult("rp-powers", f"e={e}", ok and seconds < 30.0,
                          ", ".join(f"{k.pretty(m)} {iv}" for k, iv in got.items())
                          + ("" if replayed else " (trace replay mismatch)"), seconds)


def check_circle() -> Iterator[CheckResult]:
    start = time.perf_counter()
    kb = kb_default(1)
    result = propagate(kb + lower_bound_facts("circle", kb))
    iv = result.get("circle", K.TCSigma)
    lower = [s for s in result.trace if s.target == ("sphere:1", K.TCSigma) and s.result.lo == 2 and s.bound.lo == 2]
    via_product = bool(lower) and lower[0].rule == "product"
    ok = iv == Interval(2, 2) and via_product and result.trace.replay() == result.intervals
    yield CheckResult("circle", "tcsigma-s1", ok,
                      f"TC^Sigma(S^1) {iv}, lower bound by {lower[0].rule if lower else 'nothing'}",
                      time.perf_counter() - start)


def check_torus_open() -> Iterator[CheckResult]:
    start = time.perf_counter()
    kb = kb_default(1)
    result = propagate(kb + lower_bound_facts("torus", kb))
    iv = result.get("torus", K.TCSigma)
    yield CheckResult("torus-open", "tcsigma-torus", iv == Interval(3, 4) and iv.point is None,
                      f"TC^Sigma(T^2) {iv}", time.perf_counter() - start)


# -- properties -------------------------------------------------------------------------------------

SHIPPED = ["rp:1", "rp:2", "rp:3", "rp:4", "rp:5", "rp:6", "rp:7", "rp:8",
           "sphere:1", "sphere:2", "sphere:3", "sphere:8", "torus",
           "product(rp:2,sphere:1)", "product(rp:2,rp:3)", "product(sphere:2,sphere:3)",
           "product(torus,sphere:1)", "product(rp:3,rp:4)"]


def pascal_mod2(n_max: int) -> list[list[int]]:
    rows = [[1]]
    for n in range(1, n_max + 1):
        prev = rows[-1]
        rows.append([1] + [(prev[k - 1] + prev[k]) % 2 for k in range(1, n)] + [1])
    return rows


def check_properties() -> Iterator[CheckResult]:
    start = time.perf_counter()
    broken = []
    for desc in SHIPPED:
        for variant in (ABSOLUTE, RELATIVE):
            ring = build_sp2(build_space(desc), variant)
            if ring.top_degree > 16:
                continue
            violations = validate_algebra(ring, max_reports=3)
            if violations:
                broken.append(f"{ring.name}: {violations[0]}")
    yield CheckResult("properties", "validate-sp2", not broken,
                      "; ".join(broken) or f"{len(SHIPPED)} spaces, both variants", time.perf_counter() - start)

    start = time.perf_counter()
    bad = []
    for desc in ["torus"] + [f"rp:{m}" for m in range(1, 9)]:
        ctx = SymmetricSquare(build_space(desc))
        for z, d in ctx.basis():
            if ctx.sq(d, z) != ctx.mult(z, z):
                bad.append(f"{desc}: Sq^{d} {ctx.label(z)}")
    yield CheckResult("properties", "unstability", not bad, "; ".join(bad[:5]) or "Sq^deg z = z^2 everywhere",
                      time.perf_counter() - start)

    start = time.perf_counter()
    rows = pascal_mod2(64)
    wrong = [(n, k) for n in range(65) for k in range(n + 1) if binom_mod2(n, k) != rows[n][k]]
    wrong += [(n, k) for n in range(65) for k in range(n + 1, n + 3) if binom_mod2(n, k) != 0]
    yield CheckResult("properties", "binom-pascal", not wrong, f"mismatches {wrong[:5]}" if wrong else "n <= 64",
                      time.perf_counter() - start)

    start = time.perf_counter()
    steps, failures = 0, []
    for desc in ["rp:8", "torus", "product(rp:2,rp:3)"]:
        A = build_space(desc)
        for variant in (ABSOLUTE, RELATIVE):
            ctx = SymmetricSquare(A, variant)

            def hook(before, after):
                nonlocal steps
                steps += 1
                if not after <= before - 2:
                    failures.append((desc, before, after))

            ctx.rewrite_hook = hook
            for i in range(len(A)):
                for s in range(variant.ell, 2 * A.top_degree + 1):
                    ctx.norm_E(s, [i])
    yield CheckResult("properties", "normE-measure", not failures and steps > 0,
                      f"{steps} rewrites, excess drops by >= 2 each" if not failures else str(failures[:3]),
                      time.perf_counter() - start)


CHECKS: dict[str, Callable[..., Iterator[CheckResult]]] = {
    "torus": check_torus,
    "altura": check_altura,
    "sp2p2": check_sp2p2,
    "rp-powers": check_rp_powers,
    "circle": check_circle,
    "torus-open": check_torus_open,
    "properties": check_properties,
}


def run_checks(only: list[str] | None = None, max_m: int = 16) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS.items():
        if only and name not in only:
            continue
        results += list(fn(max_m) if name == "altura" else fn())
    return results
