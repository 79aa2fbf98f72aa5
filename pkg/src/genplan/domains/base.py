from __future__ import annotations

from dataclasses import dataclass, field

from ..model import GeneralizedProblem
from ..program import Param, PlanningProgram, parse_program


class BadParams(ValueError):
    pass


@dataclass(frozen=True)
class Subtask:
    """A generalized problem whose solution becomes auxiliary procedure ``name``."""
    name: str
    problem: GeneralizedProblem
    lines: int
    params: tuple[Param, ...] = ()
    action_pool: tuple[str, ...] | None = None
    condition_pool: tuple[str, ...] | None = None


@dataclass(frozen=True)
class SubtaskSuite:
    overall: GeneralizedProblem
    subtasks: tuple[Subtask, ...]
    main_lines: int
    stack: int = 2
    one_level_only: bool = True
    main_actions: tuple[str, ...] | None = None
    main_conditions: tuple[str, ...] | None = None
    # hand-written auxiliary procedures injected alongside the synthesized ones
    dck: PlanningProgram | None = None
    # whether main may call itself
    call_main: bool = False

    def __post_init__(self):
        for sub in self.subtasks:
            if sub.problem.domain is not self.overall.domain:
                raise BadParams(f"subtask {sub.name} does not share the overall domain")


@dataclass(frozen=True)
class DomainRecipe:
    name: str
    params: dict
    problem: GeneralizedProblem
    lines: int
    # OP one procedure, R recursive, RP recursive with parameters, NP nested procedures
    kind: str = "OP"
    action_pool: tuple[str, ...] | None = None
    condition_pool: tuple[str, ...] | None = None
    stack: int = 1
    heldout: GeneralizedProblem | None = None
    suite: SubtaskSuite | None = None
    reference: PlanningProgram | None = None
    # procedure signatures for synthesis; procedures with a body are kept fixed
    signature: PlanningProgram | None = None


def get(params: dict, key: str, default, lo: int | None = None, hi: int | None = None) -> int:
    value = params.get(key, default)
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise BadParams(f"{key} must be an integer, got {value!r}") from None
    if lo is not None and value < lo:
        raise BadParams(f"{key} must be >= {lo}")
    if hi is not None and value > hi:
        raise BadParams(f"{key} must be <= {hi}")
    return value


def reference(text: str) -> PlanningProgram:
    return parse_program(text)


def check_keys(params: dict, allowed):
    extra = set(params) - set(allowed)
    if extra:
        raise BadParams(f"unknown parameters: {', '.join(sorted(extra))}")
