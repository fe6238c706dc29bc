import json

import pytest
from hypothesis import given, settings, strategies as st

from symsquare.bounds import (TOP, Fact, GuardError, Interval, K, KBFormatError, ReplayError, at_least, at_most,
                              cup_length, cup_length_witness, dumps_kb, exactly, guard_holds, kb_default,
                              load_kb, loads_kb, lower_bound_facts, reference_values, phi_height, propagate, sb_lower,
                              sp2_of, tcsigma_lower)
from symsquare.nakaoka import build_sp2
from symsquare.spaces import build_space, make_rp


# -- cup-length -------------------------------------------------------------------------


@pytest.mark.parametrize("m", range(1, 10))
def test_cup_length_rp(m):
    assert cup_length(make_rp(m)) == m


def test_cup_length_examples(torus):
    assert cup_length(torus) == 2
    assert cup_length(build_sp2(torus)) == 3
    assert cup_length(build_sp2(make_rp(2))) == 4
    assert cup_length(build_sp2(make_rp(4))) == 8
    assert cup_length(build_space("sphere:3")) == 1


def test_cup_length_witness_is_a_genuine_product():
    ring = build_sp2(build_space("torus"))
    n, witness = cup_length_witness(ring)
    assert len(witness) == n
    acc = frozenset({ring.unit})
    for b in witness:
        assert ring.degree(b) > 0
        out = set()
        for a in acc:
            out ^= ring.mult.get((a, b), frozenset())
        acc = frozenset(out)
    assert acc


def test_cup_length_of_product_at_least_sum():
    assert cup_length(build_space("product(rp:2,rp:3)")) >= 5


@pytest.mark.parametrize("desc", ["rp:3", "torus", "sphere:2", "product(rp:2,sphere:1)"])
def test_cup_length_bounded_by_top_degree(desc):
    ring = sp2_of(desc)
    assert cup_length(ring) <= ring.top_degree


@pytest.mark.parametrize("m,h", [(2, 4), (3, 4), (4, 8), (7, 8), (8, 16), (12, 16)])
def test_phi_height(m, h):
    ring = sp2_of(f"rp:{m}")
    assert phi_height(ring, ring.find("phi(1,x)")) == h


def test_lower_bound_fact_sources():
    assert tcsigma_lower("torus").interval == Interval(3, None)
    assert tcsigma_lower("circle").interval == Interval(1, None)
    assert sb_lower("rp:4").interval == Interval(8, None)
    with pytest.raises(ValueError):
        sb_lower("torus")


# -- intervals and facts ------------------------------------------------------------------


def test_interval_basics():
    assert (Interval(2, 7) & Interval(4, None)) == Interval(4, 7)
    assert (Interval(5, 7) & Interval(0, 3)).empty
    assert Interval(3, 3).point == 3 and Interval(3, 4).point is None
    assert 5 in Interval(5, None) and 4 not in Interval(5, None)
    assert str(Interval(3, 4)) == "[3, 4]" and str(Interval(2, 2)) == "= 2"


def test_fact_space_is_canonical():
    assert Fact("torus", K.TCS, TOP, "x").space == "product(sphere:1,sphere:1)"


# -- knowledge base --------------------------------------------------------------------------


def test_kb_default_contents():
    kb = kb_default()
    assert exactly("rp:2", K.Emb, 4, "") in [exactly(f.space, f.kind, f.interval.lo, "") for f in kb
                                             if f.interval.point is not None]
    assert any(f.space == "product(sphere:1,sphere:1)" and f.kind == K.TCS and f.interval.hi == 4 for f in kb)
    derived_targets = {(f.space, f.kind) for f in reference_values() if f.kind != K.Emb}
    assert not derived_targets & {(f.space, f.kind) for f in kb if f.interval.point is not None}
    assert not any(f.kind == K.TCSigma for f in kb)


def test_kb_json_round_trip():
    kb = kb_default(2) + [at_least("rp:6", K.Emb, 7, "x", guard="m in {6}")]
    assert loads_kb(dumps_kb(kb)) == kb


@pytest.mark.parametrize("text,where", [
    ("[{\"space\": \"rp:2\",", "line 1"),
    ("{}", "list"),
    ("[{\"kind\": \"TC\"}]", "record 0"),
    ("[{\"space\": \"rp:2\", \"kind\": \"nope\"}]", "record 0"),
    ("[{\"space\": \"rp:2\", \"kind\": \"TC\", \"lo\": \"two\"}]", "record 0"),
    ("[{\"space\": \"rp:2\", \"kind\": \"TC\", \"guard\": \"x is odd\"}]", "record 0"),
    ("[{\"space\": \"blob\", \"kind\": \"TC\"}]", "record 0"),
])
def test_kb_malformed(text, where):
    with pytest.raises(KBFormatError, match=where):
        loads_kb(text)


def test_load_kb_file(tmp_path):
    path = tmp_path / "kb.json"
    path.write_text(json.dumps([{"space": "rp:3", "kind": "sb", "lo": 4, "hi": None, "citation": "c"}]))
    assert load_kb(path) == [at_least("rp:3", K.SB, 4, "c")]


# -- guards ------------------------------------------------------------------------------------


def test_guards():
    top = lambda s, k: TOP  # noqa: E731
    assert guard_holds(None, "torus", top)
    assert guard_holds("m not in {6,7}", "rp:5", top)
    assert not guard_holds("m not in {6,7}", "rp:6", top)
    assert guard_holds("m >= 4 and m in {4,5}", "rp:4", top)
    assert not guard_holds("m < 3", "rp:3", top)
    assert not guard_holds("m in {1}", "sphere:1", top)
    assert not guard_holds("2*sb(m) > 3*m", "rp:4", top)
    assert guard_holds("metastable", "rp:4", lambda s, k: Interval(7, None))
    with pytest.raises(GuardError):
        guard_holds("m is prime", "rp:4", top)


def test_guarded_fact_skipped_on_excluded_m():
    kb = [exactly("rp:6", K.Emb, 7, "synthetic", guard="m not in {6,7,11,12,14,15}")]
    assert propagate(kb).get("rp:6", K.Emb) == TOP
    assert propagate(kb, check_guards=False).get("rp:6", K.Emb) == Interval(7, 7)


def test_tcs_emb_rule_respects_guard():
    # TC^S = Emb is not asserted for m = 6, so Emb says nothing about TC^S beyond <=
    result = propagate([exactly("rp:6", K.Emb, 7, "synthetic")])
    assert result.get("rp:6", K.TCS) == Interval(0, 7)
    result = propagate([exactly("rp:5", K.Emb, 7, "synthetic")])
    assert result.get("rp:5", K.TCS) == Interval(7, 7)


# -- propagation ----------------------------------------------------------------------------


def full(space, max_e=3):
    kb = kb_default(max_e)
    return propagate(kb + lower_bound_facts(space, kb))


def test_empty_kb():
    result = propagate([])
    assert result.intervals == {} and result.consistent and len(result.trace) == 0


@pytest.mark.parametrize("e", [1, 2, 3])
def test_rp_power_of_two_exact(e):
    m, want = f"rp:{2 ** e}", 2 ** (e + 1)
    result = full(m)
    for kind in (K.Emb, K.TCS, K.TCSigma, K.SBbar, K.SB):
        assert result.get(m, kind) == Interval(want, want), kind
    for claim in reference_values(3):
        if claim.space == m:
            assert result.get(m, claim.kind) == claim.interval


def test_circle_via_product_rule():
    result = full("circle", 1)
    assert result.get("circle", K.TCSigma) == Interval(2, 2)
    assert result.get("torus", K.TCSigma) == Interval(3, 4)


def test_torus_left_open():
    result = full("torus", 1)
    iv = result.get("torus", K.TCSigma)
    assert iv == Interval(3, 4) and iv.point is None


def test_inconsistency_reported():
    kb = [exactly("rp:4", K.Emb, 8, "a"), at_least("rp:4", K.TCSigma, 9, "b")]
    result = propagate(kb)
    assert not result.consistent
    assert len(result.conflicts) == 1  # the contradiction is not spread to neighbours
    conflict = result.conflicts[0]
    assert conflict.lower.target == conflict.upper.target == conflict.target
    assert "inconsistent" in str(conflict)


def test_replay_and_tamper():
    result = full("rp:4", 2)
    assert result.trace.replay() == result.intervals
    steps = result.trace.steps
    k = next(n for n, s in enumerate(steps) if s.constraint is not None)
    steps[k] = type(steps[k])(**{**steps[k].__dict__, "bound": Interval(999, None),
                                  "result": Interval(999, None)})
    with pytest.raises(ReplayError):
        result.trace.replay()


def test_explain_names_rules_and_facts():
    result = full("rp:2", 1)
    text = "\n".join(result.trace.explain(("rp:2", K.TCSigma)))
    assert "fact:" in text
    assert "tcs-window" in text and "cup-length of SP^2" in text


FACT_POOL = (
    [exactly("rp:2", K.Emb, 4, "a"), at_most("torus", K.TCS, 4, "b"), exactly("circle", K.TCS, 2, "c"),
     at_least("rp:4", K.SB, 8, "d"), at_most("rp:4", K.Emb, 8, "e"), at_least("torus", K.TCSigma, 3, "f"),
     exactly("rp:8", K.TC, 15, "g"), at_most("rp:3", K.TCS, 5, "h"), at_least("rp:3", K.TC, 3, "i")]
)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(FACT_POOL), unique=True), st.lists(st.sampled_from(FACT_POOL), unique=True))
def test_propagation_monotone(base, extra):
    small = propagate(base)
    big = propagate(base + extra)
    if big.conflicts:
        return
    for var, iv in small.intervals.items():
        got = big.intervals.get(var, TOP)
        assert got.lo >= iv.lo
        assert iv.hi is None or (got.hi is not None and got.hi <= iv.hi)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(FACT_POOL), unique=True))
def test_propagation_idempotent(facts):
    first = propagate(facts)
    if not first.consistent:
        return
    again = propagate(sorted(first.facts, key=str))
    assert again.intervals == first.intervals
    assert first.trace.replay() == first.intervals
