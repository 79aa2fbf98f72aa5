import math
import time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from genplan.compile import compile_flat, decode
from genplan.domains.grid import FIG2, grid_to_origin_problem
from genplan.model import EMPTY, Action, ClassicalProblem, ConditionalEffect, Domain, LiteralSet, bits, validate_plan
from genplan.planner import (
    AdditiveHeuristic,
    LimitHit,
    SearchLimits,
    SearchStats,
    SuccessorGenerator,
    Unsolvable,
    agrees,
    bfs_solve,
    count_candidates,
    enumerate_candidates,
    enumerate_programs,
    gbfs_solve,
    solve,
)
from genplan.program import parse_program, solves

from conftest import micro_domain, micro_problem


def h_add_oracle(problem: ClassicalProblem, state: int) -> float:
    """Fixpoint over (fluent, value) facts, one relaxed operator per effect."""
    N = len(problem.fluents)
    cost = {(f, bool(state >> f & 1)): 0.0 for f in range(N)}
    ops = []
    for a in problem.actions:
        pre = [(f, True) for f in bits(a.precondition.pos)] + [(f, False) for f in bits(a.precondition.neg)]
        groups = [(0, 0) + a._uncond] + list(a._cond)
        for cp, cn, ep, en in groups:
            eff = [(f, True) for f in bits(ep)] + [(f, False) for f in bits(en)]
            cond = [(f, True) for f in bits(cp)] + [(f, False) for f in bits(cn)]
            if eff:
                ops.append((pre + cond, eff))
    changed = True
    while changed:
        changed = False
        for pre, eff in ops:
            if all(p in cost for p in pre):
                c = 1 + sum(cost[p] for p in pre)
                for q in eff:
                    if c < cost.get(q, math.inf):
                        cost[q] = c
                        changed = True
    goal = [(f, True) for f in bits(problem.goal.pos)] + [(f, False) for f in bits(problem.goal.neg)]
    return sum(cost.get(g, math.inf) for g in goal)


@given(st.integers(0, 7), st.sampled_from(["c", "b", "!a", "a"]))
def test_h_add_matches_oracle_on_micro(state, goal):
    d = micro_domain()
    p = ClassicalProblem(d, state, d.lits(goal))
    assert AdditiveHeuristic(p)(state) == h_add_oracle(p, state)


def test_h_add_matches_oracle_on_compiled_states():
    gp = grid_to_origin_problem(3, 3, [(2, 2), (1, 1)])
    ct = compile_flat(gp, 3)
    h = AdditiveHeuristic(ct.task)
    plan = bfs_solve(ct.task)
    for s in plan.trace:
        assert h(s) == h_add_oracle(ct.task, s)


def test_bfs_is_optimal_and_gbfs_valid():
    d = micro_domain()
    p = ClassicalProblem(d, 0, d.lits("c"))
    plan = bfs_solve(p)
    assert plan.steps == ("set-a", "shift", "shift")
    g = gbfs_solve(p)
    assert validate_plan(p, g).solved and len(g) >= len(plan)


def test_goal_true_initially_gives_empty_plan():
    d = micro_domain()
    p = ClassicalProblem(d, d.state(["c"]), d.lits("c"))
    assert bfs_solve(p).steps == () and gbfs_solve(p).steps == ()


def test_unsolvable_and_limits():
    # nothing ever adds q
    d = Domain("dead", ("p", "q"), (Action("set-p", EMPTY, (ConditionalEffect(EMPTY, LiteralSet(1)),)),))
    p = ClassicalProblem(d, 0, d.lits("q"))
    for algo in ("bfs", "gbfs"):
        with pytest.raises(Unsolvable):
            solve(p, algo)
    gp = grid_to_origin_problem(4, 4, [(3, 3), (2, 1)])
    ct = compile_flat(gp, 4)
    stats = SearchStats()
    with pytest.raises(LimitHit):
        bfs_solve(ct.task, SearchLimits(max_expansions=5), stats)
    assert stats.expansions <= 6


def test_time_limit_is_checked_on_every_expansion():
    # the search must stop close to the budget, not at the next batch of expansions
    gp = grid_to_origin_problem(5, 5, [(4, 4), (3, 1), (0, 4)])
    ct = compile_flat(gp, 6)
    for algo in ("bfs", "gbfs"):
        stats = SearchStats()
        t0 = time.perf_counter()
        with pytest.raises(LimitHit) as exc:
            solve(ct.task, algo, SearchLimits(max_seconds=0.2), stats)
        assert exc.value.what == "time"
        assert time.perf_counter() - t0 < 5


def test_successor_generator_matches_brute_force():
    ct = compile_flat(grid_to_origin_problem(3, 3, [(2, 1)]), 3)
    gen = SuccessorGenerator(ct.task)
    from genplan.model import applicable
    for s in bfs_solve(ct.task).trace:
        got = sorted(x[0] for x in gen.applicable(s))
        want = [i for i, a in enumerate(ct.task.actions) if applicable(s, a)]
        assert got == want


def test_candidate_counts():
    for n in (1, 2, 3):
        for na, nc in ((1, 1), (2, 1), (3, 2)):
            acts = [f"a{i}" for i in range(na)]
            conds = [f"c{i}" for i in range(nc)]
            assert sum(1 for _ in enumerate_candidates(n, acts, conds)) == count_candidates(n, na, nc)


def test_enumerator_finds_fig2_and_nothing_for_one_line():
    gp = grid_to_origin_problem(3, 3, [(2, 1), (1, 2), (2, 2)])
    acts, conds = ["dec(x)", "dec(y)"], ["x=0", "y=0"]
    assert list(enumerate_programs(gp, 1, acts, conds)) == []
    fig2 = parse_program(FIG2, 4)
    found = list(enumerate_programs(gp, 4, acts, conds))
    assert fig2 in found
    assert all(solves(p, gp).ok for p in found)


def test_decoded_program_agrees_with_some_enumerated_one():
    gp = grid_to_origin_problem(3, 3, [(2, 2), (1, 1)])
    acts, conds = ["dec(x)", "dec(y)"], ["x=0", "y=0"]
    ct = compile_flat(gp, 3, condition_pool=conds, action_pool=acts)
    decoded = decode(bfs_solve(ct.task), ct)
    assert any(agrees(decoded, c) for c in enumerate_programs(gp, 3, acts, conds))
