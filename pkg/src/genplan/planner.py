"""Internal planners and a brute-force program enumerator.

``bfs_solve`` is the complete, optimal-length oracle. ``gbfs_solve`` is
greedy best-first search on the additive delete-relaxation heuristic, where
every conditional effect becomes its own relaxed operator ``pre ∪ C -> E``.
Negative literals are handled by giving each fluent a "false" twin fact.
"""
from __future__ import annotations

import heapq
import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from numba import njit

from .model import (
    ClassicalProblem,
    GeneralizedProblem,
    Plan,
    bits,
    validate_plan,
)
from .program import Act, End, ExecLimits, Goto, PlanningProgram, Procedure, solves


class Unsolvable(Exception):
    def __init__(self, stats=None):
        self.stats = stats
        super().__init__("no plan exists")


class LimitHit(Exception):
    def __init__(self, what: str, stats=None):
        self.what = what
        self.stats = stats
        super().__init__(f"search limit reached: {what}")


@dataclass(frozen=True)
class SearchLimits:
    max_expansions: int = 10**7
    max_seconds: float = 3600.0
    max_memory_states: int = 2 * 10**7

    def __post_init__(self):
        if min(self.max_expansions, self.max_seconds, self.max_memory_states) <= 0:
            raise ValueError("search limits must be positive")


@dataclass
class SearchStats:
    expansions: int = 0
    generated: int = 0
    plan_length: int | None = None
    seconds: float = 0.0
    evaluations: int = 0


# ---------------------------------------------------------------------------
# successor generation

class SuccessorGenerator:
    """Buckets actions by one positive precondition fluent (the rarest one).

    Actions without positive preconditions are always checked.
    """

    def __init__(self, problem: ClassicalProblem):
        acts = problem.actions
        freq: dict[int, int] = {}
        for a in acts:
            for f in bits(a.precondition.pos):
                freq[f] = freq.get(f, 0) + 1
        self.buckets: dict[int, list] = {}
        self.always = []
        for idx, a in enumerate(acts):
            pre = a.precondition
            entry = (idx, pre.pos, pre.neg, a)
            if pre.pos:
                anchor = min(bits(pre.pos), key=lambda f: (freq[f], f))
                self.buckets.setdefault(anchor, []).append(entry)
            else:
                self.always.append(entry)
        self.anchor_mask = 0
        for f in self.buckets:
            self.anchor_mask |= 1 << f

    def applicable(self, state: int) -> list:
        out = [e for e in self.always if not state & e[2]]
        for f in bits(state & self.anchor_mask):
            for e in self.buckets[f]:
                if state & e[1] == e[1] and not state & e[2]:
                    out.append(e)
        out.sort(key=lambda e: e[0])
        return out


def _check_limits(stats, limits, start, n_states):
    if stats.expansions >= limits.max_expansions:
        return "expansions"
    if n_states >= limits.max_memory_states:
        return "memory"
    if time.perf_counter() - start > limits.max_seconds:
        return "time"
    return None


def _extract(parents: dict, state: int, names) -> Plan:
    steps, trace = [], [state]
    while True:
        prev, a = parents[state]
        if prev is None:
            break
        steps.append(names[a])
        trace.append(prev)
        state = prev
    steps.reverse()
    trace.reverse()
    return Plan(tuple(steps), tuple(trace))


def _successor(state, a):
    """Successor state, or None when triggered effects conflict.

    Such transitions are invalid in any plan, so search simply prunes them.
    """
    add, dele = a._uncond
    for cpos, cneg, epos, eneg in a._cond:
        if state & cpos == cpos and not state & cneg:
            add |= epos
            dele |= eneg
    if add & dele:
        return None
    return (state & ~dele) | add


def bfs_solve(problem: ClassicalProblem, limits: SearchLimits = SearchLimits(),
              stats: SearchStats | None = None) -> Plan:
    """Breadth-first search; returns a shortest plan."""
    stats = stats if stats is not None else SearchStats()
    start = time.perf_counter()
    names = [a.name for a in problem.actions]
    goal = problem.goal
    gen = SuccessorGenerator(problem)
    init = problem.initial
    parents = {init: (None, None)}
    if goal.holds(init):
        stats.plan_length = 0
        return Plan((), (init,))
    queue = deque([init])
    while queue:
        hit = _check_limits(stats, limits, start, len(parents))
        if hit:
            stats.seconds = time.perf_counter() - start
            raise LimitHit(hit, stats)
        s = queue.popleft()
        stats.expansions += 1
        for idx, _, _, a in gen.applicable(s):
            t = _successor(s, a)
            if t is None:
                continue
            stats.generated += 1
            if t in parents:
                continue
            parents[t] = (s, idx)
            if goal.holds(t):
                plan = _extract(parents, t, names)
                stats.plan_length = len(plan)
                stats.seconds = time.perf_counter() - start
                return plan
            queue.append(t)
    stats.seconds = time.perf_counter() - start
    raise Unsolvable(stats)


# ---------------------------------------------------------------------------
# additive heuristic

@njit(cache=True)
def _h_add(state_bits, nfluents, goal, op_pre_ptr, op_pre, op_npre, op_eff_ptr, op_eff,
           fact_ops_ptr, fact_ops, free_ops, cost, remaining):
    nfacts = 2 * nfluents
    inf = np.inf
    for p in range(nfacts):
        cost[p] = inf
    nops = op_npre.shape[0]
    for o in range(nops):
        remaining[o] = op_npre[o]
    heap = [(0.0, np.int64(0))]
    heap.pop()
    for f in range(nfluents):
        p = f if state_bits[f] else nfluents + f
        cost[p] = 0.0
        heap.append((0.0, np.int64(p)))
    opcost = np.zeros(nops)
    for o in free_ops:
        opcost[o] = 1.0
        for e in range(op_eff_ptr[o], op_eff_ptr[o + 1]):
            q = op_eff[e]
            if 1.0 < cost[q]:
                cost[q] = 1.0
                heapq.heappush(heap, (1.0, np.int64(q)))
    heapq.heapify(heap)
    goals_left = 0
    is_goal = np.zeros(nfacts, dtype=np.bool_)
    for g in goal:
        if not is_goal[g]:
            is_goal[g] = True
            goals_left += 1
    while len(heap) > 0:
        c, p = heapq.heappop(heap)
        if c > cost[p]:
            continue
        if is_goal[p]:
            is_goal[p] = False
            goals_left -= 1
            if goals_left == 0:
                break
        for k in range(fact_ops_ptr[p], fact_ops_ptr[p + 1]):
            o = fact_ops[k]
            opcost[o] += c
            remaining[o] -= 1
            if remaining[o] == 0:
                oc = opcost[o] + 1.0
                for e in range(op_eff_ptr[o], op_eff_ptr[o + 1]):
                    q = op_eff[e]
                    if oc < cost[q]:
                        cost[q] = oc
                        heapq.heappush(heap, (oc, np.int64(q)))
    h = 0.0
    for g in goal:
        h += cost[g]
    return h


class AdditiveHeuristic:
    """h_add over relaxed operators, one per (action, conditional effect)."""

    def __init__(self, problem: ClassicalProblem):
        N = len(problem.fluents)
        self.N = N
        self.nbytes = (N + 7) // 8
        pre_lists, eff_lists, owner = [], [], []
        for idx, a in enumerate(problem.actions):
            pre = a.precondition
            base = [f for f in bits(pre.pos)] + [N + f for f in bits(pre.neg)]
            groups = [(0, 0, a._uncond[0], a._uncond[1])] + list(a._cond)
            for cpos, cneg, epos, eneg in groups:
                eff = [f for f in bits(epos)] + [N + f for f in bits(eneg)]
                if not eff:
                    continue
                cond = [f for f in bits(cpos)] + [N + f for f in bits(cneg)]
                pre_lists.append(sorted(set(base + cond)))
                eff_lists.append(eff)
                owner.append(idx)
        nops = len(pre_lists)
        self.owner = np.array(owner, dtype=np.int64)
        self.op_npre = np.array([len(p) for p in pre_lists], dtype=np.int64)
        self.op_pre_ptr = np.zeros(nops + 1, dtype=np.int64)
        self.op_pre_ptr[1:] = np.cumsum(self.op_npre)
        self.op_pre = np.array([f for p in pre_lists for f in p], dtype=np.int64)
        self.op_eff_ptr = np.zeros(nops + 1, dtype=np.int64)
        self.op_eff_ptr[1:] = np.cumsum([len(e) for e in eff_lists])
        self.op_eff = np.array([f for e in eff_lists for f in e], dtype=np.int64)
        fact_ops = [[] for _ in range(2 * N)]
        for o, p in enumerate(pre_lists):
            for f in p:
                fact_ops[f].append(o)
        self.fact_ops_ptr = np.zeros(2 * N + 1, dtype=np.int64)
        self.fact_ops_ptr[1:] = np.cumsum([len(x) for x in fact_ops])
        self.fact_ops = np.array([o for x in fact_ops for o in x], dtype=np.int64)
        self.free_ops = np.array([o for o, p in enumerate(pre_lists) if not p], dtype=np.int64)
        g = problem.goal
        self.goal = np.array([f for f in bits(g.pos)] + [N + f for f in bits(g.neg)], dtype=np.int64)
        self._cost = np.empty(2 * N)
        self._remaining = np.empty(nops, dtype=np.int64)

    def state_bits(self, state: int) -> np.ndarray:
        raw = np.frombuffer(state.to_bytes(self.nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.N]

    def __call__(self, state: int) -> float:
        if self.N == 0:
            return 0.0
        return _h_add(self.state_bits(state), self.N, self.goal, self.op_pre_ptr, self.op_pre,
                      self.op_npre, self.op_eff_ptr, self.op_eff, self.fact_ops_ptr, self.fact_ops,
                      self.free_ops, self._cost, self._remaining)


def gbfs_solve(problem: ClassicalProblem, limits: SearchLimits = SearchLimits(),
               stats: SearchStats | None = None) -> Plan:
    """Eager greedy best-first search on h_add, FIFO among equal h values."""
    stats = stats if stats is not None else SearchStats()
    start = time.perf_counter()
    names = [a.name for a in problem.actions]
    goal = problem.goal
    gen = SuccessorGenerator(problem)
    h = AdditiveHeuristic(problem)
    init = problem.initial
    parents = {init: (None, None)}
    if goal.holds(init):
        stats.plan_length = 0
        return Plan((), (init,))
    h0 = h(init)
    stats.evaluations += 1
    if h0 == np.inf:
        raise Unsolvable(stats)
    counter = itertools.count()
    open_list = [(h0, next(counter), init)]
    while open_list:
        hit = _check_limits(stats, limits, start, len(parents))
        if hit:
            stats.seconds = time.perf_counter() - start
            raise LimitHit(hit, stats)
        _, _, s = heapq.heappop(open_list)
        stats.expansions += 1
        for idx, _, _, a in gen.applicable(s):
            t = _successor(s, a)
            if t is None:
                continue
            stats.generated += 1
            if t in parents:
                continue
            parents[t] = (s, idx)
            if goal.holds(t):
                plan = _extract(parents, t, names)
                stats.plan_length = len(plan)
                stats.seconds = time.perf_counter() - start
                return plan
            ht = h(t)
            stats.evaluations += 1
            if ht == np.inf:
                continue
            heapq.heappush(open_list, (ht, next(counter), t))
    stats.seconds = time.perf_counter() - start
    raise Unsolvable(stats)


def solve(problem: ClassicalProblem, algorithm: str = "gbfs", limits: SearchLimits = SearchLimits(),
          stats: SearchStats | None = None) -> Plan:
    solver = {"gbfs": gbfs_solve, "bfs": bfs_solve}[algorithm]
    plan = solver(problem, limits, stats)
    check = validate_plan(problem, plan)
    if not check.solved:  # would be a planner bug
        raise AssertionError(f"internal planner returned an invalid plan: {check.reason}")
    return plan


# ---------------------------------------------------------------------------
# program enumeration

def _line_choices(i: int, length: int, n: int, actions, conditions):
    out: list = [Act(a) for a in actions]
    for t in range(min(length, n)):
        out += [Goto(t, c) for c in conditions]
    if i >= 1:
        out.append(End())
    return out


def enumerate_candidates(n: int, actions: Sequence[str], conditions: Sequence[str]) -> Iterator[PlanningProgram]:
    """All flat programs with at most ``n`` programmable lines, in canonical order.

    For L = 1..n: lines 0..L-1 hold an action, a goto (targets ascending,
    bounded by the compiled range 0..n-1) or, from line 1 on, end; line L is end.
    """
    for L in range(1, n + 1):
        choices = [_line_choices(i, L + 1, n, actions, conditions) for i in range(L)]
        for combo in itertools.product(*choices):
            yield PlanningProgram((Procedure(0, "main", (), tuple(combo) + (End(),)),), n)


def count_candidates(n: int, n_actions: int, n_conditions: int) -> int:
    total = 0
    for L in range(1, n + 1):
        per_line = n_actions + min(L + 1, n) * n_conditions
        total += (per_line) * (per_line + 1) ** (L - 1)
    return total


def enumerate_programs(gp: GeneralizedProblem, n: int, actions: Sequence[str] | None = None,
                       conditions: Sequence[str] | None = None,
                       limits: SearchLimits = SearchLimits(),
                       exec_limits: ExecLimits = ExecLimits(max_depth=1, max_steps=10**5)
                       ) -> Iterator[PlanningProgram]:
    """Stream the solving flat programs in canonical order."""
    actions = [a.name for a in gp.domain.actions] if actions is None else list(actions)
    conditions = list(gp.condition_pool) if conditions is None else list(conditions)
    start = time.perf_counter()
    for k, prog in enumerate(enumerate_candidates(n, actions, conditions)):
        if k >= limits.max_expansions:
            raise LimitHit("expansions")
        if k % 256 == 0 and time.perf_counter() - start > limits.max_seconds:
            raise LimitHit("time")
        if solves(prog, gp, exec_limits).ok:
            yield prog


def agrees(decoded: PlanningProgram, candidate: PlanningProgram) -> bool:
    """Whether ``candidate`` matches every programmed line of ``decoded``."""
    for p, q in zip(decoded.procedures, candidate.procedures):
        for i, w in enumerate(p.lines):
            if w is None:
                continue
            if i >= len(q.lines) or q.lines[i] != w:
                return False
    return True
