"""Worked examples: small hand-checked facts about the encoding, interpreter and compiler."""
import itertools

import pytest

from genplan.cli import Job, cmd_pipeline, cmd_synth, program_lines
from genplan.compile import CompilationConfig, compile_flat, compile_nested, decode, inject_dck
from genplan.domains import make_recipe
from genplan.domains.grid import FIG2, HALL_A_PARAM, grid_to_origin_problem, hall_a_problem
from genplan.model import ClassicalProblem, apply, bits, triggered_effects
from genplan.planner import bfs_solve, count_candidates, enumerate_candidates, gbfs_solve
from genplan.program import (
    BoundProgram,
    End,
    ExecConfig,
    Frame,
    Procedure,
    Terminated,
    parse_program,
    run,
    solves,
    step,
)


def grid(w=5, h=5, starts=((2, 1),)):
    return grid_to_origin_problem(w, h, starts)


def test_dec_triggers_one_value_swap():
    gp = grid()
    d = gp.domain
    s = gp.instances[0].initial  # x=2, y=1
    trig = triggered_effects(s, d.action("dec(x)"))
    assert trig == d.lits("!x=2", "x=1")
    s2 = apply(apply(s, d.action("dec(x)")), d.action("dec(x)"))
    assert d.describe(s2) == ["x=0", "y=1"]


def test_shortest_plan_on_2x2():
    gp = grid(2, 2, [(1, 1)])
    inst = gp.instances[0]
    plan = bfs_solve(ClassicalProblem(gp.domain, inst.initial, inst.goal))
    assert len(plan) == 2 and sorted(plan.steps) == ["dec(x)", "dec(y)"]


def test_goto_jumps_when_condition_is_false():
    gp = grid(starts=[(1, 0)])
    bound = BoundProgram(parse_program(FIG2), gp.domain)
    cfg = ExecConfig(gp.instances[0].initial, (Frame(0, 1, 1),))
    nxt = step(cfg, bound)
    assert nxt.stack[-1].pc == 0 and nxt.state == cfg.state


def test_fig2_trace_length():
    out = run(parse_program(FIG2), grid(), 0)
    assert isinstance(out, Terminated)
    assert grid().domain.describe(out.state) == ["x=0", "y=0"]
    # dec, goto, dec, goto, dec, goto, end
    assert out.steps == 7


def test_fig2_on_the_three_default_starts():
    gp = grid_to_origin_problem()
    assert [i.name for i in gp.instances] == ["(2,1)", "(4,4)", "(0,3)"]
    assert solves(parse_program(FIG2), gp).ok


def test_corner_program_from_every_cell():
    cells = list(itertools.product(range(3), repeat=2))
    gp = hall_a_problem(3, cells)
    rep = solves(parse_program(HALL_A_PARAM), gp)
    assert rep.ok and len(rep.instances) == 9
    corners = gp.domain.lits(*(f"visited({a},{b})" for a in (0, 2) for b in (0, 2)))
    assert all(corners.holds(r.outcome.state) for r in rep.instances)


def test_program_counter_fluents():
    gp = grid(3, 3)
    for n in (1, 3, 6):
        ct = compile_flat(gp, n)
        assert sum(f.startswith("pc_l") for f in ct.task.fluents) == n + 1


def test_end_clears_stacked_parameters():
    r = make_recipe("hall_a", "size=3")
    procs = (Procedure(0, "main"),) + tuple(Procedure(p.id, p.name, p.params) for p in r.reference.procedures[1:])
    ct = compile_nested(r.problem, procs, CompilationConfig(n=3, b=2, m=2))
    d = ct.task.domain
    replicas = {d.fluent("aux_col_k2"), d.fluent("aux_row_k2")}
    ends = [a for a in ct.actions_of(op="end") if ct.decode_table[a].level == 2]
    assert ends
    for name in ends:
        cleared = set()
        for ce in d.action(name).effects:
            cleared |= set(bits(ce.effect.neg))
        assert replicas <= cleared


def test_injecting_fig2_as_a_procedure():
    gp = grid(3, 3, [(2, 1)])
    ct = compile_nested(gp, None, CompilationConfig(n=5, b=1, m=2))
    p1 = Procedure(1, "p1", (), parse_program(FIG2).main.lines)
    done = inject_dck(ct, [p1])
    d, s = done.task.domain, done.task.initial
    true = [f for f in done.task.fluents if s >> d.fluent(f) & 1]
    # actions and end are ins fluents; a split goto is a condition plus a target
    programmed = {f.split("_")[1] for f in true if f.split("_")[0] in ("ins", "gcond", "gtgt")
                  and "_j1" in f and not f.endswith("_nil")}
    assert programmed == {"l0", "l1", "l2", "l3", "l4"}
    assert "ins_l5_j1_nil" in true
    main_nil = [f for f in done.task.fluents if f.startswith("ins_") and "_j0_" in f and f.endswith("_nil")]
    assert main_nil and all(f in true for f in main_nil)


def test_programming_plan_decodes_to_fig2():
    gp = grid(3, 3, [(2, 1), (1, 2)])
    # one spare line so that the closing end is programmed too
    ct = compile_flat(gp, 5)
    fig2 = parse_program(FIG2, 5)
    plan = []
    for i, w in enumerate(fig2.main.lines):
        plan += [a for a, e in ct.decode_table.items()
                 if e.mode == "P" and e.line == i and e.instruction == w][:1]
    assert len(plan) == 5
    assert decode(plan, ct).main.lines[:5] == fig2.main.lines


def test_goto_free_count_collapses_to_powers():
    # with no conditions, programs differing only after the first end behave
    # alike; the distinct behaviours number |pool| + |pool|^2 + ... + |pool|^n
    for n in (1, 2, 3):
        for k in (1, 2, 3):
            acts = [f"a{i}" for i in range(k)]
            progs = list(enumerate_candidates(n, acts, []))
            assert len(progs) == count_candidates(n, k, 0)
            heads = set()
            for p in progs:
                lines = p.main.lines
                heads.add(lines[:next(i for i, w in enumerate(lines) if isinstance(w, End))])
            assert len(heads) == sum(k ** j for j in range(1, n + 1))


def test_summatory_plan_decodes_to_three_lines():
    gp = make_recipe("summatory").problem
    ct = compile_flat(gp, 3)
    prog = decode(gbfs_solve(ct.task), ct)
    assert program_lines(prog.main) == 3 and solves(prog, gp).ok


def test_reverse_synthesis():
    r = make_recipe("reverse")
    rep, prog = cmd_synth(Job(r, r.problem, r.heldout, n=4))
    assert prog is not None and len(r.problem.instances) == 2
    assert program_lines(prog.main) == 4 and rep.heldout_ok is True


@pytest.mark.slow
def test_hall_a_pipeline_two_procedures():
    r = make_recipe("hall_a")
    rep, prog = cmd_pipeline(Job(r, r.problem, r.heldout, n=r.lines))
    assert prog is not None and rep.heldout_ok is True
    p1, p2 = prog.procedures[1], prog.procedures[2]
    assert [w.action for w in p1.lines if hasattr(w, "action")] == ["dec(aux)"]
    assert [w.action for w in p2.lines if hasattr(w, "action")] == ["inc(aux)"]
    assert all(p.params for p in (p1, p2))
