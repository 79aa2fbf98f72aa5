import os
import sys

import pytest

from genplan.compile import CompilationConfig, compile_flat, compile_nested, decode
from genplan.domains import make_recipe
from genplan.domains.grid import grid_to_origin_problem
from genplan.model import EMPTY, Action, ClassicalProblem, ConditionalEffect, Domain, LiteralSet
from genplan.names import NameCollision, sanitize
from genplan.pddl import (
    MalformedLine,
    NonzeroExit,
    PlanInvalid,
    PlannerCommand,
    Timeout,
    emit,
    isomorphic,
    parse,
    parse_plan,
    solve_external,
)
from genplan.planner import solve

from conftest import micro_domain, micro_problem

SELF = f"{sys.executable} -m genplan self-solve {{domain}} {{problem}} {{plan}}"


def test_predicate_naming_and_inline_effects():
    gp = micro_problem()
    ct = compile_nested(gp, None, CompilationConfig(n=2, b=1, m=2))
    text = emit(ct.task).domain_text
    assert "(:requirements :strips :negative-preconditions :conditional-effects)" in text
    assert "    (pc_l2_k1)\n" in text
    d = Domain("u", ("f",), (Action("go", EMPTY, (ConditionalEffect(EMPTY, LiteralSet(1)),)),))
    out = emit(ClassicalProblem(d, 0, LiteralSet(1))).domain_text
    assert ":effect (and (f))" in out and "when" not in out


def test_conditional_effects_emit_as_when():
    d = micro_domain()
    text = emit(ClassicalProblem(d, 0, d.lits("c"))).domain_text
    assert "(when (and (a)) (and (not (a)) (b)))" in text


@pytest.mark.parametrize("name", ["summatory", "grid_to_origin", "reverse", "list_visit"])
def test_round_trip_is_a_fixed_point(name):
    r = make_recipe(name)
    ct = compile_flat(r.problem, 2)
    pair = emit(ct.task)
    back = parse(pair.domain_text, pair.problem_text)
    assert isomorphic(ct.task, back)
    again = emit(back)
    assert again == pair


def test_sanitize_and_collisions():
    assert sanitize("inc(x)") == "inc_x"
    assert sanitize("Visited(1,2)") == "visited_1_2"
    assert sanitize("3d") == "f_3d"
    d = Domain("c", ("a b", "a_b"), ())
    with pytest.raises(NameCollision):
        emit(ClassicalProblem(d, 0, EMPTY))


def test_parse_plan_formats():
    assert parse_plan("(p_dec_x_l0)\n; cost = 1 (unit cost)\n") == ["p_dec_x_l0"]
    assert parse_plan("") == []
    assert parse_plan("0.000: (A-B)  [1]\n\n1: (c)\n") == ["a-b", "c"]
    with pytest.raises(MalformedLine) as exc:
        parse_plan("p_dec_x_l0\n")
    assert exc.value.lineno == 1
    with pytest.raises(MalformedLine) as exc:
        parse_plan("(a)\n(b c)\n")
    assert exc.value.lineno == 2


def test_planner_command_needs_placeholders():
    with pytest.raises(ValueError):
        PlannerCommand("planner {domain} {problem}")


def tiny_task():
    gp = grid_to_origin_problem(3, 3, [(2, 2), (1, 1)])
    return gp, compile_flat(gp, 3)


def test_self_solve_as_external_planner():
    gp, ct = tiny_task()
    plan = solve_external(ct.task, PlannerCommand(SELF, timeout=300))
    assert decode(plan, ct) == decode(solve(ct.task), ct)


def test_external_errors(tmp_path):
    _, ct = tiny_task()
    with pytest.raises(NonzeroExit):
        solve_external(ct.task, PlannerCommand("sh -c 'exit 3' {domain} {problem} {plan}"))
    liar = tmp_path / "liar.sh"
    liar.write_text("#!/bin/sh\necho '(teleport)' > \"$3\"\n")
    liar.chmod(0o755)
    with pytest.raises(PlanInvalid):
        solve_external(ct.task, PlannerCommand(f"{liar} {{domain}} {{problem}} {{plan}}"))
    lazy = tmp_path / "lazy.sh"
    lazy.write_text("#!/bin/sh\n: > \"$3\"\n")
    lazy.chmod(0o755)
    with pytest.raises(PlanInvalid) as exc:
        solve_external(ct.task, PlannerCommand(f"{lazy} {{domain}} {{problem}} {{plan}}"))
    assert exc.value.reason == "GoalNotSatisfied"
    slow = tmp_path / "slow.sh"
    slow.write_text("#!/bin/sh\nsleep 5\n")
    slow.chmod(0o755)
    with pytest.raises(Timeout):
        solve_external(ct.task, PlannerCommand(f"{slow} {{domain}} {{problem}} {{plan}}", timeout=0.2))


def test_tmpdir_override(tmp_path, monkeypatch):
    _, ct = tiny_task()
    monkeypatch.setenv("GENPLAN_TMPDIR", str(tmp_path))
    solve_external(ct.task, PlannerCommand(SELF, timeout=300), keep_files=True)
    runs = os.listdir(tmp_path)
    assert len(runs) == 1 and runs[0].startswith("genplan-")
    assert {"domain.pddl", "problem.pddl", "plan.txt"} <= set(os.listdir(tmp_path / runs[0]))
