import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from genplan.domains import BadParams, make_recipe, parse_params
from genplan.domains.encoding import DomainBuilder, IntVarSpec, int_var_actions
from genplan.domains.grid import visit_all_domain
from genplan.domains.lists import reverse_domain, sorting_domain
from genplan.domains.numeric import fibonacci_problem, summatory_problem
from genplan.model import ClassicalProblem, applicable, apply
from genplan.planner import Unsolvable, bfs_solve

SMALL = {
    "grid_to_origin": "w=3,h=3",
    "grid_nav": "w=3,h=3",
    "hall_a": "size=3",
    "visit_all": "w=2,h=2",
    "summatory": "train=2:3",
    "fibonacci": "train=3:4",
    "reverse": "n=3",
    "sorting": "n=3",
    "list_visit": "length=3",
    "tree_dfs": "nodes=3,instances=3",
}


def int_values(b: DomainBuilder, state: int) -> dict:
    out = {}
    for name, spec in b.ints.items():
        held = [a for a in spec.values if state >> b._idx[spec.fluent_name(a)] & 1]
        assert len(held) == 1, f"{name} holds {held}"
        out[name] = held[0]
    return out


def check_consistent(b: DomainBuilder, state: int):
    vals = int_values(b, state)
    for comp in b.comparisons:
        assert bool(state >> b._idx[comp] & 1) == b._eval_comparison(comp, vals), comp


def test_summatory_goal():
    gp = summatory_problem([3])
    d = gp.domain
    inst = gp.instances[0]
    assert inst.goal == d.lits("y=6")
    assert d.describe(inst.initial) == ["n=3", "y=0"]


def test_fibonacci_goal():
    gp = fibonacci_problem([5])
    assert gp.instances[0].goal == gp.domain.lits("f=5")
    with pytest.raises(BadParams):
        fibonacci_problem([1])


def test_inc_and_dec_saturate():
    spec = IntVarSpec("c", 2)
    b = DomainBuilder("sat")
    b.int_var("c", 2)
    inc, dec = b.int_var_actions("c")
    top, bottom = b.state({"c": 2}), b.state({"c": 0})
    assert apply(top, inc) == top and apply(bottom, dec) == bottom
    assert apply(bottom, inc) == b.state({"c": 1})
    assert [a.name for a in int_var_actions(spec)] == ["inc(c)", "dec(c)"]


@pytest.mark.parametrize("make,start", [
    (lambda: reverse_domain(4, 3), {"i": 1, "j": 4, "n": 4, "v1": 0, "v2": 1, "v3": 2, "v4": 0}),
    (lambda: sorting_domain(3, 3), {"i": 1, "j": 1, "n": 3, "v1": 2, "v2": 0, "v3": 1}),
    (lambda: visit_all_domain(3, 2), {"x": 0, "y": 0}),
])
@given(seed=st.integers(0, 10**6))
def test_random_walks_keep_comparisons_consistent(make, start, seed):
    b = make()
    d = b.build()
    vals = {k: v for k, v in start.items() if k in b.ints}
    for name, spec in b.ints.items():
        vals.setdefault(name, spec.lo)
    s = b.state(vals)
    rng = random.Random(seed)
    check_consistent(b, s)
    for _ in range(30):
        options = [a for a in d.actions if applicable(s, a)]
        s = apply(s, rng.choice(options))
        check_consistent(b, s)


def test_bounds_checked_on_states():
    b = DomainBuilder("r")
    b.int_var("v", 3)
    with pytest.raises(ValueError):
        b.state({"v": 4})
    with pytest.raises(ValueError):
        IntVarSpec("w", 0)


@pytest.mark.parametrize("name", sorted(set(SMALL) - {"tree_dfs"}))
def test_small_instances_are_classically_solvable(name):
    r = make_recipe(name, SMALL[name])
    d = r.problem.domain
    for inst in r.problem.instances:
        plan = bfs_solve(ClassicalProblem(d, inst.initial, inst.goal))
        assert inst.goal.holds(plan.trace[-1])


def test_tree_descent_needs_parameter_passing():
    # no action moves current to child: only a call binding child descends
    r = make_recipe("tree_dfs", SMALL["tree_dfs"])
    deep = [i for i in r.problem.instances if len(i.goal) > 1]
    assert deep
    inst = deep[0]
    with pytest.raises(Unsolvable):
        bfs_solve(ClassicalProblem(r.problem.domain, inst.initial, inst.goal))


def test_bad_params():
    with pytest.raises(BadParams):
        make_recipe("no_such_domain")
    with pytest.raises(BadParams):
        make_recipe("summatory", "bogus=1")
    with pytest.raises(BadParams):
        make_recipe("hall_a", "size=1")
    with pytest.raises(BadParams):
        parse_params("n4")
    assert parse_params(" n=4, seed=2 ,") == {"n": "4", "seed": "2"}


def test_recipes_expose_suites_where_decomposed():
    assert make_recipe("sorting", "n=3").suite is not None
    assert make_recipe("grid_to_origin").suite is None
    hall = make_recipe("hall_a", "procs=4")
    assert len(hall.suite.subtasks) == 4
