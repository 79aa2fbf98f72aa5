"""Programming tasks over integer variables: Summatory and Fibonacci."""
from __future__ import annotations

from itertools import permutations

from ..model import GeneralizedProblem, Instance
from .base import BadParams, DomainRecipe, Subtask, SubtaskSuite, check_keys, get, reference
from .encoding import DomainBuilder

SUMMATORY_PROGRAM = """
proc main {
  0. add(y,n)
  1. dec(n)
  2. goto(0,!(n=0))
  3. end
}
"""


def parse_values(text, default) -> list[int]:
    """``"2:3"`` -> [2, 3]; ints pass through."""
    if text is None:
        return list(default)
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    try:
        return [int(x) for x in str(text).split(":") if x]
    except ValueError:
        raise BadParams(f"expected values separated by ':', got {text!r}") from None


def _arith_builder(name: str, ranges: dict) -> DomainBuilder:
    b = DomainBuilder(name)
    for v, hi in ranges.items():
        b.int_var(v, hi)
    for v in ranges:
        b.int_var_actions(v)
    for v, w in permutations(ranges, 2):
        b.assign_action(v, w)
    for v, w in permutations(ranges, 2):
        b.add_action(v, w)
    return b


def summatory_problem(ms, top: int | None = None) -> GeneralizedProblem:
    """Instances (n=m, y=0) with goal y = 1+...+m; ``top`` widens the n range."""
    top = max(max(ms), 1) if top is None else top
    if min(ms) < 0 or top < max(ms):
        raise BadParams("summatory values must lie in 0..top")
    b = _arith_builder(f"summatory-{top}", {"n": top, "y": top * (top + 1) // 2})
    d = b.build()
    insts = tuple(Instance(b.state({"n": m, "y": 0}), d.lits(f"y={m * (m + 1) // 2}"), f"m={m}")
                  for m in ms)
    pool = tuple(f for f in d.fluents)
    return GeneralizedProblem(d, insts, pool, "summatory")


def make_summatory(params: dict) -> DomainRecipe:
    check_keys(params, {"train", "heldout"})
    ms = parse_values(params.get("train"), [2, 3])
    held = get(params, "heldout", 10, 1, 30)
    gp = summatory_problem(ms)
    heldout = summatory_problem(list(range(1, held + 1)))
    return DomainRecipe("summatory", dict(train=":".join(map(str, ms)), heldout=held), gp,
                        lines=3, kind="OP", heldout=heldout, reference=reference(SUMMATORY_PROGRAM))


# ---------------------------------------------------------------------------

FIBONACCI_PROGRAM = """
proc main {
  0. assign(f2,f1)
  1. assign(f1,f)
  2. add(f,f2)
  3. dec(n)
  4. goto(0,!(n=1))
  5. end
}
"""

FIBONACCI_NESTED = """
proc main {
  0. p1
  1. dec(n)
  2. goto(0,!(n=1))
  3. end
}
proc p1 {
  0. assign(f2,f1)
  1. assign(f1,f)
  2. add(f,f2)
  3. end
}
"""


def fib(m: int) -> int:
    a, b = 0, 1
    for _ in range(m - 1):
        a, b = b, a + b
    return b


def fibonacci_problem(ms, top: int | None = None) -> GeneralizedProblem:
    """Instances (n=m, f=1, f1=0, f2=0) with goal f = F_m (F_1 = F_2 = 1)."""
    top = max(ms) if top is None else top
    if min(ms) < 2:
        raise BadParams("fibonacci instances need m >= 2")
    hi = fib(top)
    b = _arith_builder(f"fibonacci-{top}", {"n": top, "f": hi, "f1": hi, "f2": hi})
    d = b.build()
    insts = tuple(Instance(b.state({"n": m, "f": 1, "f1": 0, "f2": 0}), d.lits(f"f={fib(m)}"), f"m={m}")
                  for m in ms)
    return GeneralizedProblem(d, insts, tuple(d.fluents), "fibonacci")


def make_fibonacci(params: dict) -> DomainRecipe:
    check_keys(params, {"train", "heldout"})
    ms = parse_values(params.get("train"), [3, 5])
    held = get(params, "heldout", 10, 2, 20)
    top = max(max(ms), held)
    gp = fibonacci_problem(ms, top)
    heldout = fibonacci_problem(list(range(2, held + 1)), top)
    d = gp.domain
    # one update step: (f, f1, f2) <- (f + f1, f, f1)
    step_insts = []
    # f2 holds leftovers from earlier steps, so the step may not rely on it
    # and f1 + f2 never happens to equal f
    for f1, f, f2 in ((0, 1, 0), (1, 1, 1), (1, 2, 0), (2, 3, 2)):
        s = d.state([f"n={top}", f"f={f}", f"f1={f1}", f"f2={f2}"])
        step_insts.append(Instance(s, d.lits(f"f={f + f1}", f"f1={f}"), f"f={f},f1={f1}"))
    step = GeneralizedProblem(d, tuple(step_insts), (), "fib-step")
    arith = tuple(a.name for a in d.actions if a.name.startswith(("assign", "add")))
    suite = SubtaskSuite(gp, (Subtask("p1", step, 3, action_pool=arith, condition_pool=()),),
                         main_lines=3, main_actions=("dec(n)",), main_conditions=("n=1",))
    return DomainRecipe("fibonacci", dict(train=":".join(map(str, ms)), heldout=held), gp,
                        lines=5, kind="OP", heldout=heldout, suite=suite,
                        reference=reference(FIBONACCI_PROGRAM))
