import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from genplan.domains import make_recipe
from genplan.domains.grid import FIG2, HALL_A_PARAM, hall_a_problem
from genplan.model import ConflictingEffects, successor
from genplan.program import (
    Act,
    Call,
    End,
    ExecLimits,
    FailedDepth,
    FailedError,
    FailedLoop,
    Goto,
    PlanningProgram,
    Procedure,
    ProgramSyntaxError,
    Terminated,
    flat_program,
    format_program,
    parse_program,
    run,
    solves,
)

from conftest import micro_problem

ALL = ["grid_to_origin", "grid_nav", "hall_a", "visit_all", "summatory", "fibonacci",
       "reverse", "sorting", "list_visit", "tree_dfs"]


def flat_reference(program, domain, state, max_steps=10_000):
    """Call-free interpreter keyed on (state, pc)."""
    lines = program.main.lines
    pc, seen = 0, set()
    while (state, pc) not in seen and len(seen) < max_steps:
        seen.add((state, pc))
        w = lines[pc] if pc < len(lines) else None
        if w is None:
            return ("error",)
        if isinstance(w, End):
            return ("term", state)
        if isinstance(w, Act):
            a = domain.action(w.action)
            try:
                state = successor(state, a)
            except ConflictingEffects:
                return ("error",)
            pc += 1
        else:
            pc = pc + 1 if domain.condition(w.condition).holds(state) else w.target
    return ("loop",)


def classify(outcome):
    if isinstance(outcome, Terminated):
        return ("term", outcome.state)
    if isinstance(outcome, FailedLoop):
        return ("loop",)
    return ("error",)


def random_flat(rng, actions, conds, n):
    L = rng.randint(1, n)
    lines = []
    for i in range(L):
        r = rng.random()
        if r < 0.5:
            lines.append(Act(rng.choice(actions)))
        elif r < 0.85:
            lines.append(Goto(rng.randrange(L + 1), rng.choice(conds)))
        elif i >= 1:
            lines.append(End())
        else:
            lines.append(None)
    return flat_program(lines + [End()])


@given(st.integers(0, 10**9))
def test_stack_interpreter_matches_flat_reference(seed):
    gp = micro_problem()
    rng = random.Random(seed)
    prog = random_flat(rng, [a.name for a in gp.domain.actions], list(gp.condition_pool), 5)
    for inst in gp.instances:
        assert classify(run(prog, gp, inst)) == flat_reference(prog, gp.domain, inst.initial)


def test_fig2_solves_every_cell():
    r = make_recipe("grid_to_origin", "all=1")
    assert len(r.problem.instances) == 25
    assert solves(parse_program(FIG2), r.problem).ok


@pytest.mark.parametrize("size", [3, 5])
def test_parameterized_hall_a(size):
    n = size - 1
    gp = hall_a_problem(size, [(0, 0), (n, n), (1, 2), (n, 1)])
    assert solves(parse_program(HALL_A_PARAM), gp).ok


@pytest.mark.parametrize("name", ALL)
def test_reference_programs_round_trip_and_solve(name):
    r = make_recipe(name)
    text = format_program(r.reference)
    assert parse_program(text) == r.reference
    assert solves(r.reference, r.problem, ExecLimits(max_depth=max(r.stack, 2) + 1)).ok
    assert solves(r.reference, r.heldout, ExecLimits(max_depth=max(r.stack, 2) + 1)).ok


def test_parse_errors_carry_lines():
    with pytest.raises(ProgramSyntaxError) as exc:
        parse_program("proc main {\n  0. dec(x)\n  2. end\n}\n")
    assert exc.value.line == 3
    with pytest.raises(ValueError):
        parse_program("proc main {\n  0. dec(x)\n  1. goto(9,!(x=0))\n  2. end\n}\n")


def test_loop_and_unprogrammed_line():
    gp = micro_problem()
    looping = flat_program([Goto(0, "c"), End()])
    assert isinstance(run(looping, gp, 0), FailedLoop)
    hole = flat_program([None, End()])
    assert isinstance(run(hole, gp, 0), FailedError)
    bad = flat_program([Act("shift"), End()])
    # a and b true together make shift conflict
    from genplan.model import Instance
    both = gp.with_instances([Instance(gp.domain.state(["a", "b"]), gp.instances[0].goal)])
    assert isinstance(run(bad, both, 0), FailedError)


def test_recursion_depth_is_bounded():
    main = Procedure(0, "main", (), (Act("set-a"), Call(0), End()))
    prog = PlanningProgram((main,))
    gp = micro_problem()
    # set-a makes the state repeat only through the growing stack
    assert isinstance(run(prog, gp, 0, ExecLimits(max_depth=5)), FailedDepth)


def test_call_restores_caller_parameters():
    r = make_recipe("hall_a", "size=3")
    prog = r.reference
    out = run(prog, r.problem, 0, trace=True)
    assert isinstance(out, Terminated)
    # every configuration inside main sees the pointers it started with
    d = r.problem.domain
    x, y = d.variable("x"), d.variable("y")
    for cfg in out.trace:
        if len(cfg.stack) == 1:
            assert (x.value(cfg.state), y.value(cfg.state)) == ("col", "row")
