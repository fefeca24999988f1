import pytest

from stratcheck.bisim import (
    check_a_bisimulation,
    check_simulation,
    expand_relation,
    joint_choices,
)
from stratcheck.errors import UnknownReference
from stratcheck.model import EPSILON, build_global_model
from stratcheck.spec_lang import parse_relation, parse_spec, validate

from conftest import fixture_text


def build(text):
    return build_global_model(validate(parse_spec(text)))


def load_pairs(rel_name, left, right, coalition=None):
    spec = parse_relation(fixture_text(rel_name), left.amas, right.amas,
                          coalition=coalition)
    return expand_relation(left, right, spec), spec


# One action branches at s0 on the right model only; the stub state s1
# deadlocks on both sides.
SMALL_A = """
AGENT X:
  INIT: s0
  s0 -> s1 : go
PROPOSITIONS: p
COALITION: X
FORMULA: <<X>> G !p
"""

SMALL_B = """
AGENT X:
  INIT: s0
  s0 -> s1 : go
  s0 -> s2 : alt
PROPOSITIONS: p
COALITION: X
FORMULA: <<X>> G !p
"""

SMALL_REL = """
(s0) ~ (s0)
(s1) ~ (s1)
"""

# flag is set and never cleared, so the s0 profile recurs with two
# different stores.
FLAG_LOOP = """
AGENT P:
  INIT: s0
  s0 -> s1 : on SET flag=true
  s1 -> s0 : off
PROPOSITIONS: flag
COALITION: P
FORMULA: <<P>> F flag
"""


def test_joint_choices_controller(tgc_model):
    assert joint_choices(tgc_model, ("Controller",), 0) == [("a1",), ("b1",)]
    assert joint_choices(tgc_model, ("Controller",), 1) == [("a2",), ("b2",)]


def test_joint_choices_two_members(tgc_model):
    assert joint_choices(tgc_model, ("Train1", "Train2"), 0) == [("a1", "b1")]
    assert joint_choices(tgc_model, ("Train1", "Train2"), 7) == [("a3", "b3")]


def test_joint_choices_stutter_when_member_is_stuck():
    m = build(SMALL_A)
    assert joint_choices(m, ("X",), 1) == [(EPSILON,)]


def test_expand_identity_in_discovery_order(tgc_model):
    other = build(fixture_text("tgc.stv"))
    pairs, spec = load_pairs("identity8.rel", tgc_model, other)
    assert spec.coalition == ("Controller",)
    assert pairs == [(i, i) for i in range(8)]


def test_expand_multiplies_over_stores():
    left = build(FLAG_LOOP)
    right = build(FLAG_LOOP)
    assert [left.locals_names(i) for i in range(left.n_states())] == [
        ("s0",), ("s1",), ("s0",)]
    spec = parse_relation("(s0) ~ (s0)", left.amas, right.amas)
    assert expand_relation(left, right, spec) == [(0, 0), (0, 2), (2, 0), (2, 2)]


def test_store_mismatch_inside_one_descriptor_line():
    left = build(FLAG_LOOP)
    right = build(FLAG_LOOP)
    spec = parse_relation("(s0) ~ (s0)\n(s1) ~ (s1)", left.amas, right.amas)
    pairs = expand_relation(left, right, spec)
    verdict = check_a_bisimulation(left, right, pairs, ("P",))
    assert verdict.record() == {
        "ok": False,
        "condition": "valuation",
        "direction": "L2R",
        "pair": ["(s0)", "(s0)"],
        "detail": "flag",
    }


def test_identity_is_a_bisimulation(tgc_model):
    other = build(fixture_text("tgc.stv"))
    pairs, _ = load_pairs("identity8.rel", tgc_model, other)
    verdict = check_a_bisimulation(tgc_model, other, pairs, ("Controller",))
    assert verdict.ok
    assert verdict.record() == {"ok": True, "pairs": 8}


def test_identity_holds_in_strict_mode(tgc_model):
    other = build(fixture_text("tgc.stv"))
    pairs, _ = load_pairs("identity8.rel", tgc_model, other)
    verdict = check_a_bisimulation(tgc_model, other, pairs, ("Controller",),
                                   strict=True)
    assert verdict.ok


def test_valuation_violation_when_effects_are_dropped(tgc_model):
    other = build(fixture_text("tgc_noin1.stv"))
    pairs, _ = load_pairs("identity8.rel", tgc_model, other)
    verdict = check_a_bisimulation(tgc_model, other, pairs, ("Controller",))
    assert verdict.record() == {
        "ok": False,
        "condition": "valuation",
        "direction": "L2R",
        "pair": ["(R,T,W)", "(R,T,W)"],
        "detail": "in1",
    }


def test_epistemic_violation_when_a_class_mate_is_unrelated(tgc_model):
    other = build(fixture_text("tgc.stv"))
    pairs, _ = load_pairs("identity_missing_gaa.rel", tgc_model, other)
    verdict = check_a_bisimulation(tgc_model, other, pairs, ("Controller",))
    assert verdict.record() == {
        "ok": False,
        "condition": "epistemic",
        "direction": "L2R",
        "pair": ["(G,W,W)", "(G,W,W)"],
        "detail": "(G,A,A)",
    }


def test_missing_initial_pair(tgc_model):
    other = build(fixture_text("tgc.stv"))
    pairs, _ = load_pairs("identity_noinit.rel", tgc_model, other)
    verdict = check_a_bisimulation(tgc_model, other, pairs, ("Controller",))
    assert verdict.record() == {
        "ok": False,
        "condition": "initial",
        "direction": "L2R",
        "pair": ["(G,W,W)", "(G,W,W)"],
        "detail": "missing",
    }


def test_single_train_variant_state_space():
    m = build(fixture_text("tgc_single.stv"))
    got = [(m.locals_names(i), tuple(m.true_props(i)))
           for i in range(m.n_states())]
    assert got == [
        (("G", "W"), ()),
        (("R", "T"), ("in1",)),
        (("R", "W"), ()),
        (("G", "A"), ()),
        (("G", "T"), ("in1",)),
        (("R", "A"), ()),
    ]
    assert m.edges == [
        (0, "a1", 1), (0, "b1", 2),
        (1, "a2", 3), (1, "b2", 4),
        (2, "b2", 0),
        (3, "b1", 5), (3, "a3", 0),
        (4, "b1", 1),
        (5, "b2", 3), (5, "a3", 2),
    ]


def test_strategic_violation_against_single_train(tgc_model):
    other = build(fixture_text("tgc_single.stv"))
    pairs, _ = load_pairs("pairing_single.rel", tgc_model, other)
    verdict = check_a_bisimulation(tgc_model, other, pairs, ("Controller",))
    assert verdict.record() == {
        "ok": False,
        "condition": "strategic",
        "direction": "L2R",
        "pair": ["(G,W,A)", "(G,W)"],
        "detail": "b1",
    }


def test_strict_mode_reports_the_same_first_violation(tgc_model):
    # the committed response for the (G, G) profile is re-used at the
    # violating pair, so the strict run fails in the same place
    other = build(fixture_text("tgc_single.stv"))
    pairs, _ = load_pairs("pairing_single.rel", tgc_model, other)
    lax = check_a_bisimulation(tgc_model, other, pairs, ("Controller",))
    strict = check_a_bisimulation(tgc_model, other, pairs, ("Controller",),
                                  strict=True)
    assert strict.record() == lax.record()


def test_strategic_violation_in_the_reverse_direction():
    left = build(SMALL_A)
    right = build(SMALL_B)
    spec = parse_relation(SMALL_REL, left.amas, right.amas)
    pairs = expand_relation(left, right, spec)
    verdict = check_a_bisimulation(left, right, pairs, ("X",))
    assert verdict.record() == {
        "ok": False,
        "condition": "strategic",
        "direction": "R2L",
        "pair": ["(s0)", "(s0)"],
        "detail": "alt",
    }


def test_one_direction_alone_passes():
    left = build(SMALL_A)
    right = build(SMALL_B)
    spec = parse_relation(SMALL_REL, left.amas, right.amas)
    pairs = expand_relation(left, right, spec)
    assert check_simulation(left, right, pairs, ("X",)) is None
    flipped = [(ri, li) for li, ri in pairs]
    violation = check_simulation(right, left, flipped, ("X",))
    assert violation is not None
    assert violation.condition == "strategic"
    assert violation.detail == "alt"


def test_unknown_coalition_member_is_rejected(tgc_model):
    other = build(fixture_text("tgc_single.stv"))
    pairs, _ = load_pairs("pairing_single.rel", tgc_model, other)
    with pytest.raises(UnknownReference):
        check_a_bisimulation(tgc_model, other, pairs, ("Train2",))
