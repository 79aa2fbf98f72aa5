import pytest
from hypothesis import given
from hypothesis import strategies as st

from genplan.model import (
    EMPTY,
    Action,
    ClassicalProblem,
    ConditionalEffect,
    ConflictingEffects,
    Domain,
    Literal,
    LiteralSet,
    NotApplicable,
    UnknownAction,
    apply,
    bits,
    triggered_effects,
    validate_plan,
)

from conftest import micro_domain


def ls(pos=(), neg=()):
    return LiteralSet.of([Literal(f) for f in pos] + [Literal(f, False) for f in neg])


def test_bits_in_order():
    assert list(bits(0b101001)) == [0, 3, 5]
    assert list(bits(0)) == []


def test_literal_set_rejects_both_polarities():
    with pytest.raises(ValueError):
        LiteralSet(0b10, 0b10)


def test_literal_set_holds_and_literals():
    s = ls([0, 2], [1])
    assert s.holds(0b101) and not s.holds(0b111) and not s.holds(0b001)
    assert [(l.fluent, l.positive) for l in s.literals()] == [(0, True), (1, False), (2, True)]
    assert len(s) == 3 and EMPTY.holds(12345)


def test_conditional_effects_read_the_pre_state():
    d = micro_domain()
    shift = d.action("shift")
    # a and b both true: a->b and b->c both fire on the old state
    s = d.state(["a", "b"])
    with pytest.raises(ConflictingEffects):
        apply(s, shift)
    assert d.describe(apply(d.state(["a"]), shift)) == ["b"]
    assert d.describe(apply(d.state(["b"]), shift)) == ["c"]
    assert apply(0, shift) == 0


def test_precondition_and_unknown_action():
    a = Action("needs-0", ls([0]), (ConditionalEffect(EMPTY, ls([1])),))
    with pytest.raises(NotApplicable):
        apply(0, a)
    assert apply(1, a) == 0b11
    d = Domain("d", ("f0", "f1"), (a,))
    with pytest.raises(UnknownAction):
        d.action("nope")


def test_validate_plan_reasons():
    d = micro_domain()
    p = ClassicalProblem(d, 0, d.lits("c"))
    ok = validate_plan(p, ["set-a", "shift", "shift"])
    assert ok.solved and len(ok.trace) == 4
    short = validate_plan(p, ["set-a", "shift"])
    assert not short.solved and short.reason == "GoalNotSatisfied" and short.failed_step == 2
    a = Action("guarded", ls([0]))
    d2 = Domain("d2", ("f0",), (a,))
    bad = validate_plan(ClassicalProblem(d2, 0, EMPTY), ["guarded"])
    assert bad.reason == "NotApplicable" and bad.failed_step == 0


def test_domain_lits_and_duplicates():
    d = micro_domain()
    assert d.lits("a", "!c") == ls([d.fluent("a")], [d.fluent("c")])
    with pytest.raises(ValueError):
        Domain("dup", ("x", "x"), ())


# set-based reference semantics for conditional effects
def ref_apply(state: set, pre, effects):
    assert all(f in state for f in pre[0]) and not any(f in state for f in pre[1])
    add, dele = set(), set()
    for (cp, cn), (ep, en) in effects:
        if all(f in state for f in cp) and not any(f in state for f in cn):
            add |= set(ep)
            dele |= set(en)
    if add & dele:
        return None
    return (state - dele) | add


fl = st.integers(0, 5)
lit_pair = st.tuples(st.frozensets(fl, max_size=2), st.frozensets(fl, max_size=2)).filter(
    lambda p: not (p[0] & p[1]))
effect = st.tuples(lit_pair, lit_pair)


@given(st.frozensets(fl), st.lists(effect, max_size=4))
def test_apply_matches_set_semantics(state, effects):
    ces = tuple(ConditionalEffect(ls(*c), ls(*e)) for c, e in effects)
    a = Action("x", EMPTY, ces)
    s = sum(1 << f for f in state)
    expected = ref_apply(set(state), (set(), set()), effects)
    if expected is None:
        with pytest.raises(ConflictingEffects):
            apply(s, a)
    else:
        assert set(bits(apply(s, a))) == expected
        trig = triggered_effects(s, a)
        assert (s & ~trig.neg) | trig.pos == apply(s, a)
