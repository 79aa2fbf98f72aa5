"""Binary-tree depth-first traversal with a recursive, parameterized procedure."""
from __future__ import annotations

import random

from ..model import Condition, GeneralizedProblem, Instance, VariableDomain
from ..program import PlanningProgram, Procedure
from .base import BadParams, DomainRecipe, check_keys, get, reference
from .encoding import DomainBuilder

# p1 visits the subtree rooted at its parameter: it recurses on left children
# and walks the right spine in place.
TREE_PROGRAM = """
proc main {
  0. p1(child)
  1. end
}
proc p1(current:node) {
  0. visit(current)
  1. left(current)
  2. goto(4,!(is-node(child)))
  3. p1(child)
  4. right(current)
  5. goto(0,!(is-nil(current)))
  6. end
}
"""


def tree_domain(N: int) -> DomainBuilder:
    nodes = [f"t{k}" for k in range(1, N + 1)]
    values = tuple(nodes + ["nil"])
    dom = VariableDomain("node", values)
    b = DomainBuilder(f"tree-{N}")
    b.variable("current", dom)
    b.variable("child", dom)
    for a in nodes:
        b.fluent(f"node({a})")
        b.fluent(f"visited({a})")
    left, right, visit = [], [], []
    for a in nodes:
        visit.append(([f"current={a}"], [f"visited({a})"]))
        for c in values:
            # child := left child of current
            if c == a:
                left.append(([f"current={a}"], [f"!child={c}"]))
                continue
            left.append(([f"current={a}", f"lchild({a},{c})"], [f"child={c}"]))
            left.append(([f"current={a}", f"!lchild({a},{c})"], [f"!child={c}"]))
            # current := right child of current
            right.append(([f"current={a}", f"rchild({a},{c})"], [f"current={c}", f"!current={a}"]))
    b.action("left(current)", (), left)
    b.action("right(current)", (), right)
    b.action("visit(current)", (), visit)
    b.indirect_condition("is-node(child)", [([f"child={a}"], f"node({a})") for a in nodes]
                         + [(["child=nil"], None)])
    b.conditions.append(Condition("is-nil(current)", fluent=b.fluent("current=nil")))
    return b


def random_tree(rng: random.Random, size: int):
    """Random binary tree shape as nested (left, right) tuples; None is empty."""
    if size == 0:
        return None
    k = rng.randrange(size)
    return (random_tree(rng, k), random_tree(rng, size - 1 - k))


def tree_instance(b: DomainBuilder, shape, labels, name=""):
    true, goal = [], []
    it = iter(labels)

    def walk(t):
        if t is None:
            return "nil"
        me = next(it)
        true.append(f"node({me})")
        goal.append(f"visited({me})")
        lc = walk(t[0])
        rc = walk(t[1])
        true.append(f"lchild({me},{lc})")
        true.append(f"rchild({me},{rc})")
        return me

    root = walk(shape)
    true += [f"child={root}", "current=nil"]
    return Instance(b.state({}, true), b.lits(goal), name or f"tree-{len(goal)}")


def tree_problem(N: int, count: int, seed: int = 0, max_nodes: int | None = None) -> GeneralizedProblem:
    rng = random.Random(seed)
    b = tree_domain(N)
    nodes = [f"t{k}" for k in range(1, N + 1)]
    hi = N if max_nodes is None else max_nodes
    insts = []
    for t in range(count):
        size = rng.randint(1, hi)
        insts.append(tree_instance(b, random_tree(rng, size), rng.sample(nodes, size), f"tree{t}-{size}"))
    return GeneralizedProblem(b.build(), tuple(insts), ("is-node(child)", "is-nil(current)"), f"tree-{N}")


def make_tree_dfs(params: dict) -> DomainRecipe:
    check_keys(params, {"nodes", "instances", "seed"})
    N = get(params, "nodes", 5, 1, 31)
    k = get(params, "instances", 1, 1)
    seed = get(params, "seed", 0)
    if N < 1:
        raise BadParams("trees need at least one node")
    gp = tree_problem(N, k, seed)
    held = tree_problem(N, 20, seed + 1)
    held = gp.with_instances(held.instances)
    ref = reference(TREE_PROGRAM)
    # main only hands the root to p1; p1 itself is synthesized
    main, p1 = ref.procedures
    sig = PlanningProgram((main, Procedure(p1.id, p1.name, p1.params)))
    return DomainRecipe("tree_dfs", dict(nodes=N), gp, lines=6, kind="RP", stack=N + 1,
                        heldout=held, reference=ref, signature=sig)
