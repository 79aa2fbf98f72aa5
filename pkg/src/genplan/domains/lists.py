"""List domains: Reverse, Sorting and the linked-list traversal."""
from __future__ import annotations

import random

from ..model import GeneralizedProblem, Instance, VariableDomain
from ..program import Param
from .base import BadParams, DomainRecipe, Subtask, SubtaskSuite, check_keys, get, reference
from .encoding import DomainBuilder

REVERSE_PROGRAM = """
proc main {
  0. swap-i-j
  1. inc(i)
  2. dec(j)
  3. goto(0,!(lt(j,i)))
  4. end
}
"""


def _swap_value_effects(b: DomainBuilder, positions, values):
    """Exchange v_a and v_b when i=a and j=b; equal values are left alone."""
    effects = []
    for a in positions:
        for c in positions:
            if a == c:
                continue
            for x in values:
                for src, dst in ((a, c), (c, a)):
                    effects.append(([f"i={a}", f"j={c}", f"v{src}={x}", f"!v{dst}={x}"],
                                    [f"!v{src}={x}", f"v{dst}={x}"]))
    return effects


def reverse_domain(N: int, V: int) -> DomainBuilder:
    b = DomainBuilder(f"reverse-{N}")
    b.int_var("i", N + 1)
    b.int_var("j", N + 1)
    b.int_var("n", N, 1)
    for r in range(1, N + 1):
        b.int_var(f"v{r}", V - 1)
    b.track("i", "j", "=")
    b.track("i", "j", "<")
    b.track("j", "i", "<")
    b.int_var_actions("i")
    b.int_var_actions("j")
    b.action("swap-i-j", (), _swap_value_effects(b, range(1, N + 1), range(V)))
    return b


def _list_state(b, N, values, extra):
    vals = {f"v{r}": values[r - 1] if r <= len(values) else 0 for r in range(1, N + 1)}
    vals.update(extra)
    return b.state(vals)


def random_lists(rng, count, lo, hi, V):
    return [[rng.randrange(V) for _ in range(rng.randint(lo, hi))] for _ in range(count)]


def make_reverse(params: dict) -> DomainRecipe:
    check_keys(params, {"n", "values", "seed"})
    N = get(params, "n", 4, 2, 8)
    V = get(params, "values", N, 2, 9)
    rng = random.Random(get(params, "seed", 0))
    b = reverse_domain(N, V)
    d = b.build()

    def inst(lst):
        goal = d.lits(*(f"v{r + 1}={x}" for r, x in enumerate(reversed(lst))))
        return Instance(_list_state(b, N, lst, {"i": 1, "j": len(lst), "n": len(lst)}), goal,
                        "[" + ",".join(map(str, lst)) + "]")

    # a full-length list needs N // 2 swaps; on a pair, a second swap would undo the first
    train = [[(k * 3 + 2) % V for k in range(N)], [1 % V, 0]]
    gp = GeneralizedProblem(d, tuple(inst(x) for x in train), ("eq(i,j)", "lt(i,j)", "lt(j,i)"), "reverse")
    held = gp.with_instances([inst(x) for x in random_lists(rng, 30, 1, N, V)])
    return DomainRecipe("reverse", dict(n=N, values=V), gp, lines=4, kind="OP",
                        heldout=held, reference=reference(REVERSE_PROGRAM))


# ---------------------------------------------------------------------------
# Sorting (selection sort through a "select the smallest" procedure)

SORTING_PROGRAM = """
proc main {
  0. p1
  1. inc(i)
  2. assign(j,i)
  3. goto(0,!(lt(n,i)))
  4. end
}
proc p1 {
  0. goto(2,!(lt(v[j],v[i])))
  1. swap-i-j
  2. inc(j)
  3. goto(0,!(lt(n,j)))
  4. end
}
"""

SORT_CONDITIONS = ("lt(v[j],v[i])", "lt(n,j)", "lt(n,i)")


def rel(a, c):
    return f"lt(v{a},v{c})"


def sorting_domain(N: int, V: int) -> DomainBuilder:
    """Positions 1..N; i, j range up to N+1 so loops can step past the end.

    Values are 0..V-1; positions past the end of a shorter list hold the
    padding value V, which is larger than every list element. Besides the
    values v_r, fluents lt(v_a,v_b) record the order between positions and
    are exchanged by swap-i-j together with the values.
    """
    b = DomainBuilder(f"sorting-{N}")
    b.int_var("i", N + 1, 1)
    b.int_var("j", N + 1, 1)
    b.int_var("n", N, 1)
    pos = range(1, N + 1)
    for r in pos:
        b.int_var(f"v{r}", V)
    for a in pos:
        for c in pos:
            if a != c:
                b.fluent(rel(a, c))
    b.track("n", "i", "<")
    b.track("n", "j", "<")
    b.int_var_actions("i")
    b.int_var_actions("j")
    b.assign_action("j", "i")
    effects = _swap_value_effects(b, pos, range(V + 1))
    for a in pos:
        for c in pos:
            if a == c:
                continue
            sel = [f"i={a}", f"j={c}"]
            pairs = [(rel(a, c), rel(c, a))]
            for o in pos:
                if o not in (a, c):
                    pairs += [(rel(a, o), rel(c, o)), (rel(o, a), rel(o, c))]
            for p, q in pairs:
                effects.append((sel + [p, "!" + q], ["!" + p, q]))
                effects.append((sel + ["!" + p, q], [p, "!" + q]))
    b.action("swap-i-j", (), effects)
    cases = []
    for a in range(1, N + 2):
        for c in range(1, N + 2):
            target = rel(c, a) if a != c and a <= N and c <= N else None
            cases.append(([f"i={a}", f"j={c}"], target))
    b.indirect_condition("lt(v[j],v[i])", cases)
    return b


def sorting_state(b, N, lst, i=1, j=1, n=None):
    pad = b.ints["v1"].hi
    vals = [lst[r - 1] if r <= len(lst) else pad for r in range(1, N + 1)]
    true = [rel(a, c) for a in range(1, N + 1) for c in range(1, N + 1)
            if a != c and vals[a - 1] < vals[c - 1]]
    values = {f"v{r}": vals[r - 1] for r in range(1, N + 1)}
    values.update(i=i, j=j, n=len(lst) if n is None else n)
    return b.state(values, true)


def sorting_instance(b, d, N, lst):
    goal = d.lits(*(f"v{r + 1}={x}" for r, x in enumerate(sorted(lst))))
    return Instance(sorting_state(b, N, lst), goal, "[" + ",".join(map(str, lst)) + "]")


def sorting_problem(N: int, V: int, lists, name="sorting") -> GeneralizedProblem:
    b = sorting_domain(N, V)
    d = b.build()
    return GeneralizedProblem(d, tuple(sorting_instance(b, d, N, x) for x in lists), SORT_CONDITIONS, name)


def make_sorting(params: dict) -> DomainRecipe:
    check_keys(params, {"n", "values", "seed"})
    N = get(params, "n", 4, 2, 7)
    V = get(params, "values", N, 2, 9)
    rng = random.Random(get(params, "seed", 0))
    b = sorting_domain(N, V)
    d = b.build()
    top = V - 1
    # a reversed full-length list needs every pass of the outer loop
    train = [[min(x, top) for x in range(N - 1, -1, -1)], [min(2, top), 0, 1][:N], [1, 0]]
    gp = GeneralizedProblem(d, tuple(sorting_instance(b, d, N, x) for x in train), SORT_CONDITIONS, "sorting")
    held = gp.with_instances([sorting_instance(b, d, N, x) for x in random_lists(rng, 50, 1, N, V)])

    def select(lst, i):
        goal = [f"v{i}={min(lst[i - 1:])}", f"i={i}"]
        return Instance(sorting_state(b, N, lst, i=i, j=i), d.lits(*goal), f"{lst}@{i}")

    # minimum at the far end, already in front, and in between
    sel_lists = [(train[0], 1), ([0, min(2, top), 1 % V][:N], 1), ([0, top, 1 % V, 0][:N], 2),
                 ([1 % V, 0][:N], 1), ([top, 0, top, 1 % V][:N], 1)]
    sel = GeneralizedProblem(d, tuple(select(lst, i) for lst, i in sel_lists if i <= len(lst)),
                             ("lt(v[j],v[i])", "lt(n,j)"), "select-min")
    suite = SubtaskSuite(gp, (Subtask("p1", sel, 4, action_pool=("swap-i-j", "inc(j)")),),
                         main_lines=4, main_actions=("inc(i)", "assign(j,i)"),
                         main_conditions=("lt(n,i)",))
    return DomainRecipe("sorting", dict(n=N, values=V), gp, lines=7, kind="NP",
                        heldout=held, suite=suite, reference=reference(SORTING_PROGRAM))


# ---------------------------------------------------------------------------
# Linked list traversal

LIST_PROGRAM = """
proc main {
  0. visit
  1. goto(3,!(is-tail(current)))
  2. end
  3. next
  4. main
  5. end
}
"""

LIST_DCK = """
proc main {
  0. p1
  1. end
}
proc p1 {
  0. visit
  1. goto(3,!(is-tail(current)))
  2. end
  3. next
  4. p1
  5. end
}
"""


def list_domain(L: int) -> DomainBuilder:
    nodes = tuple(f"n{k}" for k in range(1, L + 1))
    b = DomainBuilder(f"list-{L}")
    b.variable("current", VariableDomain("node", nodes))
    for a in nodes:
        b.fluent(f"is-tail({a})")
        b.fluent(f"visited({a})")
    nxt, visit = [], []
    for a in nodes:
        visit.append(([f"current={a}"], [f"visited({a})"]))
        for c in nodes:
            if a != c:
                nxt.append(([f"current={a}", f"succ({a},{c})"], [f"!current={a}", f"current={c}"]))
    b.action("next", (), nxt)
    b.action("visit", (), visit)
    b.indirect_condition("is-tail(current)", [([f"current={a}"], f"is-tail({a})") for a in nodes])
    return b


def list_instance(b: DomainBuilder, order) -> Instance:
    """``order``: node names from head to tail."""
    true = [f"current={order[0]}", f"is-tail({order[-1]})"]
    true += [f"succ({a},{c})" for a, c in zip(order, order[1:])]
    goal = b.lits([f"visited({a})" for a in order])
    return Instance(b.state({}, true), goal, "-".join(order))


def list_problem(L: int, lengths, seed: int = 0) -> GeneralizedProblem:
    rng = random.Random(seed)
    b = list_domain(L)
    nodes = [f"n{k}" for k in range(1, L + 1)]
    insts = []
    for k in lengths:
        if not 1 <= k <= L:
            raise BadParams(f"list length {k} outside 1..{L}")
        insts.append(list_instance(b, rng.sample(nodes, k)))
    return GeneralizedProblem(b.build(), tuple(insts), ("is-tail(current)",), f"list-{L}")


def make_list_visit(params: dict) -> DomainRecipe:
    check_keys(params, {"length", "instances", "seed"})
    L = get(params, "length", 6, 1, 40)
    k = get(params, "instances", min(L, 6), 1)
    seed = get(params, "seed", 0)
    gp = list_problem(L, [1 + t % L for t in range(k)], seed)
    held = list_problem(L, list(range(1, L + 1)), seed + 1)
    held = gp.with_instances(held.instances)
    suite = SubtaskSuite(gp, (), main_lines=2, stack=L + 1, one_level_only=False,
                         dck=reference(LIST_DCK))
    return DomainRecipe("list_visit", dict(length=L), gp, lines=5, kind="R", stack=L + 1,
                        heldout=held, suite=suite, reference=reference(LIST_PROGRAM))
