"""Grid navigation domains: to-origin, navigation to a goal cell, Hall-A, Visit-All."""
from __future__ import annotations

import random

from ..model import GeneralizedProblem, Instance, VariableDomain
from ..program import Param
from .base import BadParams, DomainRecipe, Subtask, SubtaskSuite, check_keys, get, reference
from .encoding import DomainBuilder

FIG2 = """
proc main {
  0. dec(x)
  1. goto(0,!(x=0))
  2. dec(y)
  3. goto(2,!(y=0))
  4. end
}
"""


def grid_to_origin_problem(w: int = 5, h: int = 5, starts=((2, 1), (4, 4), (0, 3))) -> GeneralizedProblem:
    b = DomainBuilder("grid-to-origin")
    b.int_var("x", w - 1)
    b.int_var("y", h - 1)
    b.int_var_actions("x")
    b.int_var_actions("y")
    d = b.build()
    goal = d.lits("x=0", "y=0")
    insts = []
    for x, y in starts:
        if not (0 <= x < w and 0 <= y < h):
            raise BadParams(f"start ({x},{y}) is outside the {w}x{h} grid")
        insts.append(Instance(b.state({"x": x, "y": y}), goal, f"({x},{y})"))
    return GeneralizedProblem(d, tuple(insts), ("x=0", "y=0"), "grid-to-origin")


def make_grid_to_origin(params: dict) -> DomainRecipe:
    check_keys(params, {"w", "h", "all"})
    w, h = get(params, "w", 5, 2, 12), get(params, "h", 5, 2, 12)
    if get(params, "all", 0):
        starts = [(x, y) for x in range(w) for y in range(h)]
    else:
        starts = [s for s in ((2, 1), (4, 4), (0, 3), (1, 1)) if s[0] < w and s[1] < h]
    gp = grid_to_origin_problem(w, h, starts)
    held = grid_to_origin_problem(w, h, [(x, y) for x in range(w) for y in range(h)])
    return DomainRecipe("grid_to_origin", dict(w=w, h=h), gp, lines=4, kind="OP",
                        heldout=held, reference=reference(FIG2))


# ---------------------------------------------------------------------------
# navigation to an arbitrary goal cell

def _nav_builder(w, h):
    b = DomainBuilder("grid-nav")
    for v, hi in (("x", w - 1), ("y", h - 1), ("xg", w - 1), ("yg", h - 1)):
        b.int_var(v, hi)
    for v, g in (("x", "xg"), ("y", "yg")):
        b.track(v, g, "=")
        b.track(v, g, "<")
        b.track(g, v, "<")
    b.int_var_actions("x")
    b.int_var_actions("y")
    return b


GRID_NAV_PROGRAM = """
proc main {
  0. p1
  1. p2
  2. end
}
proc p1 {
  0. goto(2,!(lt(x,xg)))
  1. inc(x)
  2. goto(4,!(lt(xg,x)))
  3. dec(x)
  4. goto(0,!(eq(x,xg)))
  5. end
}
proc p2 {
  0. goto(2,!(lt(y,yg)))
  1. inc(y)
  2. goto(4,!(lt(yg,y)))
  3. dec(y)
  4. goto(0,!(eq(y,yg)))
  5. end
}
"""


def make_grid_nav(params: dict) -> DomainRecipe:
    check_keys(params, {"w", "h", "seed", "instances"})
    w, h = get(params, "w", 4, 2, 10), get(params, "h", 4, 2, 10)
    rng = random.Random(get(params, "seed", 0))
    b = _nav_builder(w, h)
    d = b.build()
    conds = ("eq(x,xg)", "lt(x,xg)", "lt(xg,x)", "eq(y,yg)", "lt(y,yg)", "lt(yg,y)")

    def inst(x, y, xg, yg, goal):
        return Instance(b.state({"x": x, "y": y, "xg": xg, "yg": yg}), d.lits(*goal),
                        f"({x},{y})->({xg},{yg})")

    def full(x, y, xg, yg):
        return inst(x, y, xg, yg, [f"x={xg}", f"y={yg}"])

    cells = [(x, y) for x in range(w) for y in range(h)]
    k = get(params, "instances", 4, 1)
    train = [full(*rng.choice(cells), *rng.choice(cells)) for _ in range(k)]
    gp = GeneralizedProblem(d, tuple(train), conds, "grid-nav")
    held = gp.with_instances([full(*rng.choice(cells), *rng.choice(cells)) for _ in range(30)])

    col = GeneralizedProblem(d, (inst(0, 1, w - 1, 0, [f"x={w - 1}", "y=1"]),
                                 inst(w - 1, 0, 1, 1, ["x=1", "y=0"])), conds[:3], "column")
    row = GeneralizedProblem(d, (inst(1, 0, 0, h - 1, [f"y={h - 1}", "x=1"]),
                                 inst(0, h - 1, 1, 1, ["y=1", "x=0"])), conds[3:], "row")
    suite = SubtaskSuite(gp, (
        Subtask("p1", col, 5, action_pool=("inc(x)", "dec(x)")),
        Subtask("p2", row, 5, action_pool=("inc(y)", "dec(y)")),
    ), main_lines=2, main_actions=())
    return DomainRecipe("grid_nav", dict(w=w, h=h), gp, lines=10, kind="NP", heldout=held,
                        suite=suite, reference=reference(GRID_NAV_PROGRAM))


# ---------------------------------------------------------------------------
# Hall-A: visit the four corners of an n x n grid.
#
# The position is held in two registers col and row. Program variables x, y
# and aux point to a register (domain "reg"), so p1(x) decrements the column
# while p1(y) decrements the row; conditions "v=0" / "v=n" test the register
# that v points to.

HALL_A_PARAM = """
proc main {
  0. p1(x)
  1. p1(y)
  2. p2(x)
  3. p2(y)
  4. p1(x)
  5. end
}
proc p1(aux:reg) {
  0. dec(aux)
  1. goto(0,!(aux=0))
  2. end
}
proc p2(aux:reg) {
  0. inc(aux)
  1. goto(0,!(aux=n))
  2. end
}
"""

HALL_A_FOUR = """
proc main {
  0. p1
  1. p2
  2. p3
  3. p4
  4. end
}
proc p1 {
  0. dec(x)
  1. goto(0,!(x=0))
  2. dec(y)
  3. goto(2,!(y=0))
  4. end
}
proc p2 {
  0. inc(x)
  1. goto(0,!(x=n))
  2. end
}
proc p3 {
  0. inc(y)
  1. goto(0,!(y=n))
  2. end
}
proc p4 {
  0. dec(x)
  1. goto(0,!(x=0))
  2. end
}
"""

REG = VariableDomain("reg", ("col", "row"))
POINTERS = ("x", "y", "aux")


def _corner(n, a, b):
    return (a in (0, n)) and (b in (0, n))


def hall_a_domain(size: int):
    if size < 2:
        raise BadParams("the grid needs at least 2 cells per side")
    n = size - 1
    b = DomainBuilder(f"hall-a-{size}")
    b.int_var("col", n)
    b.int_var("row", n)
    for p in POINTERS:
        b.variable(p, REG)
    for a, c in ((0, 0), (n, 0), (0, n), (n, n)):
        b.fluent(f"visited({a},{c})")
    for p in POINTERS:
        for op, delta in (("inc", 1), ("dec", -1)):
            effects = []
            for reg in REG.values:
                for a in range(n + 1):
                    a2 = min(max(a + delta, 0), n)
                    if a2 == a:
                        continue
                    effects.append(([f"{p}={reg}", f"{reg}={a}"], [f"!{reg}={a}", f"{reg}={a2}"]))
                    for other in range(n + 1):
                        pos = (a2, other) if reg == "col" else (other, a2)
                        if _corner(n, *pos):
                            oreg = "row" if reg == "col" else "col"
                            effects.append(([f"{p}={reg}", f"{reg}={a}", f"{oreg}={other}"],
                                            [f"visited({pos[0]},{pos[1]})"]))
            b.action(f"{op}({p})", (), effects)
        for name, value in ((f"{p}=0", 0), (f"{p}=n", n)):
            b.indirect_condition(name, [([f"{p}={reg}"], f"{reg}={value}") for reg in REG.values])
    return b


def hall_a_instance(b: DomainBuilder, size: int, col: int, row: int, goal=None, pointers=None):
    n = size - 1
    pointers = pointers or {"x": "col", "y": "row", "aux": "col"}
    true = [f"{p}={r}" for p, r in pointers.items()]
    if _corner(n, col, row):
        true.append(f"visited({col},{row})")
    if goal is None:
        goal = [f"visited({a},{c})" for a, c in ((0, 0), (n, 0), (0, n), (n, n))]
    s = b.state({"col": col, "row": row}, true)
    d_lits = b.lits(goal)
    return Instance(s, d_lits, f"({col},{row})")


def hall_a_problem(size: int, starts) -> GeneralizedProblem:
    b = hall_a_domain(size)
    insts = [hall_a_instance(b, size, c, r) for c, r in starts]
    d = b.build()
    return GeneralizedProblem(d, tuple(insts), ("x=0", "y=0", "x=n", "y=n"), f"hall-a-{size}")


def make_hall_a(params: dict) -> DomainRecipe:
    check_keys(params, {"size", "procs"})
    # from 4x4 up, a start three cells from the target rules out unrolled loops
    size = get(params, "size", 4, 2, 9)
    procs = get(params, "procs", 2)
    if procs not in (2, 4):
        raise BadParams("procs must be 2 (parameterized) or 4")
    n = size - 1
    b = hall_a_domain(size)
    d = b.build()

    def gp_of(insts, pool, name):
        return GeneralizedProblem(d, tuple(insts), pool, name)

    starts = list(dict.fromkeys([(1 % size, 1 % size), (n, 0), (0, n)]))
    train = gp_of([hall_a_instance(b, size, c, r) for c, r in starts], ("x=0", "y=0", "x=n", "y=n"),
                  f"hall-a-{size}")
    held = train.with_instances([hall_a_instance(b, size, c, r)
                                 for c in range(size) for r in range(size)])
    if procs == 2:
        def sub(goal_value):
            insts = []
            # the two registers start at different distances from the target
            far, near = (n, max(n - 1, 1)) if goal_value == 0 else (0, min(1, n - 1))
            for reg, (c, r) in (("col", (far, 1 % size)), ("row", (0, near))):
                target = f"{reg}={goal_value}"
                keep = f"row={r}" if reg == "col" else f"col={c}"
                insts.append(hall_a_instance(b, size, c, r, [target, keep],
                                             {"x": "col", "y": "row", "aux": reg}))
            return insts
        subtasks = (
            Subtask("p1", gp_of(sub(0), ("aux=0", "aux=n"), "to-zero"), 2, (Param("reg", "aux"),),
                    action_pool=("dec(aux)", "inc(aux)")),
            Subtask("p2", gp_of(sub(n), ("aux=0", "aux=n"), "to-max"), 2, (Param("reg", "aux"),),
                    action_pool=("dec(aux)", "inc(aux)")),
        )
        suite = SubtaskSuite(train, subtasks, main_lines=5, main_actions=())
        ref = HALL_A_PARAM
    else:
        moves = tuple(f"{op}({v})" for v in ("x", "y") for op in ("inc", "dec"))
        pool = ("x=0", "y=0", "x=n", "y=n")

        def sub(goal, starts):
            return [hall_a_instance(b, size, c, r, goal(c, r)) for c, r in starts]
        subtasks = (
            Subtask("p1", gp_of(sub(lambda c, r: ["col=0", "row=0"], [(n, 1 % size), (1 % size, n)]),
                                pool, "origin"), 4, action_pool=moves),
            Subtask("p2", gp_of(sub(lambda c, r: [f"col={n}", f"row={r}"], [(0, 0), (1 % size, n)]),
                                pool, "right"), 2, action_pool=moves),
            Subtask("p3", gp_of(sub(lambda c, r: [f"row={n}", f"col={c}"], [(n, 0), (0, 1 % size)]),
                                pool, "top"), 2, action_pool=moves),
            Subtask("p4", gp_of(sub(lambda c, r: ["col=0", f"row={r}"], [(n, n), (1 % size, 0)]),
                                pool, "left"), 2, action_pool=moves),
        )
        suite = SubtaskSuite(train, subtasks, main_lines=4, main_actions=())
        ref = HALL_A_FOUR
    return DomainRecipe("hall_a", dict(size=size, procs=procs), train, lines=14, kind="NP",
                        heldout=held, suite=suite, reference=reference(ref))


# ---------------------------------------------------------------------------
# Visit-All: starting bottom-left, visit every cell of a w x h grid

VISIT_ALL_PROGRAM = """
proc main {
  0. p1
  1. p2
  2. inc(y)
  3. goto(0,!(lt(h,y)))
  4. end
}
proc p1 {
  0. visit
  1. inc(x)
  2. goto(0,!(eq(x,w)))
  3. visit
  4. end
}
proc p2 {
  0. dec(x)
  1. goto(0,!(x=0))
  2. end
}
"""


def visit_all_domain(W: int, H: int):
    b = DomainBuilder(f"visit-all-{W}x{H}")
    b.int_var("x", W - 1)
    b.int_var("y", H)
    b.int_var("w", W - 1)
    b.int_var("h", H - 1)
    b.track("x", "w", "=")
    b.track("h", "y", "<")
    b.int_var_actions("x")
    b.int_var_actions("y")
    effects = []
    for a in range(W):
        for c in range(H):
            effects.append(([f"x={a}", f"y={c}"], [f"visited({a},{c})"]))
    b.action("visit", (), effects)
    return b


def make_visit_all(params: dict) -> DomainRecipe:
    check_keys(params, {"w", "h"})
    W, H = get(params, "w", 4, 2, 8), get(params, "h", 3, 2, 8)
    b = visit_all_domain(W, H)
    d = b.build()
    pool = ("eq(x,w)", "lt(h,y)", "x=0")

    def inst(w, h, x=0, y=0, goal=None):
        goal = goal or [f"visited({a},{c})" for a in range(w + 1) for c in range(h + 1)]
        return Instance(b.state({"x": x, "y": y, "w": w, "h": h}), d.lits(*goal), f"{w + 1}x{h + 1}")

    sizes = [(W - 1, min(1, H - 1)), (max(1, W - 2), H - 1)]
    gp = GeneralizedProblem(d, tuple(inst(w, h) for w, h in sizes), pool, "visit-all")
    held = gp.with_instances([inst(w, h) for w in range(1, W) for h in range(H)])
    row = GeneralizedProblem(d, tuple(
        inst(w, H - 1, 0, y, [f"visited({a},{y})" for a in range(w + 1)])
        for w, y in ((W - 1, 0), (max(1, W - 2), H - 1))), pool, "row")
    back = GeneralizedProblem(d, tuple(
        inst(W - 1, H - 1, x, 0, ["x=0"]) for x in (W - 1, max(1, W - 2))), pool, "back")
    suite = SubtaskSuite(gp, (
        Subtask("p1", row, 4, action_pool=("visit", "inc(x)")),
        Subtask("p2", back, 2, action_pool=("dec(x)",)),
    ), main_lines=4, main_actions=("inc(y)", "visit"))
    return DomainRecipe("visit_all", dict(w=W, h=H), gp, lines=7, kind="NP", heldout=held,
                        suite=suite, reference=reference(VISIT_ALL_PROGRAM))
