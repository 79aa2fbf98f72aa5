"""Propositional planning with conditional effects.

States are Python ints used as bit vectors over dense fluent ids, so hashing
and copying are cheap even for compiled tasks with thousands of fluents.
Literal sets are stored as a pair of masks (positive, negative).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class PlanningError(Exception):
    pass


class ConflictingEffects(PlanningError):
    """Two triggered effects assign opposite values to one fluent."""


class NotApplicable(PlanningError):
    pass


class UnknownAction(PlanningError, KeyError):
    pass


def bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Literal:
    fluent: int
    positive: bool = True


@dataclass(frozen=True)
class LiteralSet:
    pos: int = 0
    neg: int = 0

    def __post_init__(self):
        if self.pos & self.neg:
            clash = next(bits(self.pos & self.neg))
            raise ValueError(f"literal set assigns both polarities to fluent {clash}")

    @classmethod
    def of(cls, literals: Iterable[Literal]) -> "LiteralSet":
        pos = neg = 0
        for lit in literals:
            if lit.positive:
                pos |= 1 << lit.fluent
            else:
                neg |= 1 << lit.fluent
        return cls(pos, neg)

    def holds(self, state: int) -> bool:
        return state & self.pos == self.pos and not state & self.neg

    def literals(self) -> list[Literal]:
        out = [Literal(f, True) for f in bits(self.pos)]
        out += [Literal(f, False) for f in bits(self.neg)]
        out.sort(key=lambda lit: lit.fluent)
        return out

    @property
    def fluents(self) -> int:
        return self.pos | self.neg

    def __or__(self, other: "LiteralSet") -> "LiteralSet":
        return LiteralSet(self.pos | other.pos, self.neg | other.neg)

    def __bool__(self) -> bool:
        return bool(self.pos or self.neg)

    def __len__(self) -> int:
        return self.pos.bit_count() + self.neg.bit_count()


EMPTY = LiteralSet()


@dataclass(frozen=True)
class ConditionalEffect:
    condition: LiteralSet
    effect: LiteralSet


@dataclass(frozen=True)
class Action:
    name: str
    precondition: LiteralSet = EMPTY
    effects: tuple[ConditionalEffect, ...] = ()

    def __post_init__(self):
        # flat tuples for the hot loop in apply()
        uncond_add = uncond_del = 0
        conditional = []
        for ce in self.effects:
            if ce.condition:
                conditional.append((ce.condition.pos, ce.condition.neg, ce.effect.pos, ce.effect.neg))
            else:
                uncond_add |= ce.effect.pos
                uncond_del |= ce.effect.neg
        object.__setattr__(self, "_uncond", (uncond_add, uncond_del))
        object.__setattr__(self, "_cond", tuple(conditional))


def applicable(state: int, action: Action) -> bool:
    pre = action.precondition
    return state & pre.pos == pre.pos and not state & pre.neg


def _triggered(state: int, action: Action) -> tuple[int, int]:
    add, dele = action._uncond
    for cpos, cneg, epos, eneg in action._cond:
        if state & cpos == cpos and not state & cneg:
            add |= epos
            dele |= eneg
    if add & dele:
        raise ConflictingEffects(
            f"{action.name}: fluent {next(bits(add & dele))} both added and deleted")
    return add, dele


def triggered_effects(state: int, action: Action) -> LiteralSet:
    add, dele = _triggered(state, action)
    return LiteralSet(add, dele)


def apply(state: int, action: Action) -> int:
    if not applicable(state, action):
        raise NotApplicable(action.name)
    add, dele = _triggered(state, action)
    return (state & ~dele) | add


def successor(state: int, action: Action) -> int:
    """``apply`` without the applicability check (caller guarantees it)."""
    add, dele = _triggered(state, action)
    return (state & ~dele) | add


@dataclass(frozen=True)
class VariableDomain:
    name: str
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError(f"variable domain {self.name!r} is empty")


@dataclass(frozen=True)
class Variable:
    """A program variable whose value is encoded by one fluent per domain value."""
    name: str
    domain: VariableDomain
    fluents: tuple[int, ...]

    @property
    def mask(self) -> int:
        m = 0
        for f in self.fluents:
            m |= 1 << f
        return m

    def value(self, state: int):
        for x, f in zip(self.domain.values, self.fluents):
            if state >> f & 1:
                return x
        return None


@dataclass(frozen=True)
class Condition:
    """A goto condition.

    Either a plain fluent, or an indirect condition given by cases
    ``(selector, target)``: the first case whose selector holds decides the
    value, ``target`` being a fluent id or None for constant false. When no
    selector holds the condition is false.
    """
    name: str
    fluent: int | None = None
    cases: tuple[tuple[LiteralSet, int | None], ...] = ()

    def holds(self, state: int) -> bool:
        if self.fluent is not None:
            return bool(state >> self.fluent & 1)
        for sel, target in self.cases:
            if sel.holds(state):
                return target is not None and bool(state >> target & 1)
        return False

    @property
    def indirect(self) -> bool:
        return self.fluent is None


@dataclass(frozen=True, eq=False)
class Domain:
    """Shared vocabulary: fluents, actions, goto conditions and variables."""
    name: str
    fluents: tuple[str, ...]
    actions: tuple[Action, ...]
    conditions: tuple[Condition, ...] = ()
    variables: tuple[Variable, ...] = ()
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        idx = {}
        for i, f in enumerate(self.fluents):
            if f in idx:
                raise ValueError(f"duplicate fluent {f!r}")
            idx[f] = i
        acts = {}
        for a in self.actions:
            if a.name in acts:
                raise ValueError(f"duplicate action {a.name!r}")
            acts[a.name] = a
        self._index.update(
            fluent=idx,
            action=acts,
            condition={c.name: c for c in self.conditions},
            variable={v.name: v for v in self.variables},
        )

    def fluent(self, name: str) -> int:
        return self._index["fluent"][name]

    def has_fluent(self, name: str) -> bool:
        return name in self._index["fluent"]

    def action(self, name: str) -> Action:
        try:
            return self._index["action"][name]
        except KeyError:
            raise UnknownAction(name) from None

    def has_action(self, name: str) -> bool:
        return name in self._index["action"]

    def condition(self, name: str) -> Condition:
        conds = self._index["condition"]
        if name in conds:
            return conds[name]
        if name in self._index["fluent"]:
            return Condition(name, fluent=self._index["fluent"][name])
        raise KeyError(f"unknown condition {name!r}")

    def variable(self, name: str) -> Variable:
        return self._index["variable"][name]

    def has_variable(self, name: str) -> bool:
        return name in self._index["variable"]

    def state(self, true_fluents: Iterable[str]) -> int:
        s = 0
        for f in true_fluents:
            s |= 1 << self.fluent(f)
        return s

    def lits(self, *names: str) -> LiteralSet:
        """Literal set from names; a leading ``!`` marks a negative literal."""
        lits = []
        for n in names:
            if n.startswith("!"):
                lits.append(Literal(self.fluent(n[1:]), False))
            else:
                lits.append(Literal(self.fluent(n), True))
        return LiteralSet.of(lits)

    def describe(self, state: int) -> list[str]:
        return [self.fluents[i] for i in bits(state)]

    def __len__(self) -> int:
        return len(self.fluents)


@dataclass(frozen=True)
class ClassicalProblem:
    domain: Domain
    initial: int
    goal: LiteralSet
    name: str = ""

    def __post_init__(self):
        width = len(self.domain.fluents)
        if self.initial >> width or self.goal.fluents >> width:
            raise ValueError("initial state or goal references unknown fluents")

    @property
    def fluents(self) -> tuple[str, ...]:
        return self.domain.fluents

    @property
    def actions(self) -> tuple[Action, ...]:
        return self.domain.actions


@dataclass(frozen=True)
class Instance:
    initial: int
    goal: LiteralSet
    name: str = ""


@dataclass(frozen=True)
class GeneralizedProblem:
    """Classical problems that share one domain and differ in initial state and goal."""
    domain: Domain
    instances: tuple[Instance, ...]
    condition_pool: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        for c in self.condition_pool:
            self.domain.condition(c)

    def problem(self, t: int) -> ClassicalProblem:
        inst = self.instances[t]
        return ClassicalProblem(self.domain, inst.initial, inst.goal, inst.name)

    def problems(self) -> list[ClassicalProblem]:
        return [self.problem(t) for t in range(len(self.instances))]

    def conditions(self) -> list[Condition]:
        return [self.domain.condition(c) for c in self.condition_pool]

    def with_instances(self, instances: Sequence[Instance]) -> "GeneralizedProblem":
        return GeneralizedProblem(self.domain, tuple(instances), self.condition_pool, self.name)


@dataclass(frozen=True)
class Plan:
    steps: tuple[str, ...]
    trace: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.trace is not None and len(self.trace) != len(self.steps) + 1:
            raise ValueError("trace length must be plan length + 1")

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class ValidationResult:
    solved: bool
    trace: tuple[int, ...]
    failed_step: int | None = None
    reason: str | None = None


def validate_plan(problem: ClassicalProblem, plan: Plan | Sequence[str]) -> ValidationResult:
    steps = plan.steps if isinstance(plan, Plan) else tuple(plan)
    actions = [problem.domain.action(name) for name in steps]
    s = problem.initial
    trace = [s]
    for i, a in enumerate(actions):
        if not applicable(s, a):
            return ValidationResult(False, tuple(trace), i, "NotApplicable")
        try:
            s = successor(s, a)
        except ConflictingEffects as exc:
            return ValidationResult(False, tuple(trace), i, f"ConflictingEffects: {exc}")
        trace.append(s)
    if problem.goal.holds(s):
        return ValidationResult(True, tuple(trace))
    return ValidationResult(False, tuple(trace), len(actions), "GoalNotSatisfied")
