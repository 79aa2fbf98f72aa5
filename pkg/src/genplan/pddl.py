"""Grounded PDDL emission and parsing, plan files, and an external planner adapter.

Emitted domains use only zero-arity predicates and parameter-free actions
with ``:strips :negative-preconditions :conditional-effects``. Unconditional
effects are merged and written inline; every other conditional effect
becomes a ``when`` clause. Parsing accepts exactly the emitted subset, so
emit -> parse -> emit is a fixed point.
"""
from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass

from .model import (
    EMPTY,
    Action,
    ClassicalProblem,
    ConditionalEffect,
    Domain,
    Literal,
    LiteralSet,
    Plan,
    validate_plan,
)
from .names import sanitize, sanitize_all

REQUIREMENTS = "(:requirements :strips :negative-preconditions :conditional-effects)"


class PddlSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class PddlPair:
    domain_text: str
    problem_text: str


# ---------------------------------------------------------------------------
# emission

def _lit_text(lit: Literal, names) -> str:
    atom = f"({names[lit.fluent]})"
    return atom if lit.positive else f"(not {atom})"


def _conj(ls: LiteralSet, names) -> str:
    parts = [_lit_text(lit, names) for lit in ls.literals()]
    return "(and" + "".join(" " + p for p in parts) + ")"


def _effect_text(a: Action, names) -> str:
    add, dele = a._uncond
    parts = [_lit_text(lit, names) for lit in LiteralSet(add, dele).literals()]
    for cpos, cneg, epos, eneg in a._cond:
        parts.append(f"(when {_conj(LiteralSet(cpos, cneg), names)} {_conj(LiteralSet(epos, eneg), names)})")
    return "(and" + "".join(" " + p for p in parts) + ")"


def emit(problem: ClassicalProblem, domain_name: str | None = None,
         problem_name: str | None = None) -> PddlPair:
    """Grounded PDDL for ``problem``; raises NameCollision if sanitized names clash."""
    fl = sanitize_all(problem.fluents)
    acts = sanitize_all([a.name for a in problem.actions])
    dname = sanitize(domain_name or problem.domain.name or "domain")
    pname = sanitize(problem_name or problem.name or "problem")
    out = [f"(define (domain {dname})", f"  {REQUIREMENTS}", "  (:predicates"]
    out += [f"    ({f})" for f in fl]
    out[-1] += ")"
    for a, name in zip(problem.actions, acts):
        out.append(f"  (:action {name}")
        out.append("    :parameters ()")
        out.append(f"    :precondition {_conj(a.precondition, fl)}")
        out.append(f"    :effect {_effect_text(a, fl)})")
    out.append(")")
    domain_text = "\n".join(out) + "\n"

    init = " ".join(f"({fl[f]})" for f in range(len(fl)) if problem.initial >> f & 1)
    prob = [f"(define (problem {pname})", f"  (:domain {dname})",
            f"  (:init{' ' + init if init else ''})", f"  (:goal {_conj(problem.goal, fl)})", ")"]
    return PddlPair(domain_text, "\n".join(prob) + "\n")


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _sexpr(text: str):
    text = "\n".join(line.split(";", 1)[0] for line in text.splitlines())
    stack: list[list] = [[]]
    for tok in _TOKEN.findall(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise PddlSyntaxError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok.lower())
    if len(stack) != 1 or len(stack[0]) != 1:
        raise PddlSyntaxError("expected exactly one top-level expression")
    return stack[0][0]


def _literals(expr, index) -> LiteralSet:
    if not expr or expr[0] != "and":
        items = [expr]
    else:
        items = expr[1:]
    lits = []
    for it in items:
        positive = True
        if it and it[0] == "not":
            positive, it = False, it[1]
        if not isinstance(it, list) or len(it) != 1 or it[0] not in index:
            raise PddlSyntaxError(f"unknown atom {it!r}")
        lits.append(Literal(index[it[0]], positive))
    return LiteralSet.of(lits)


def _section(expr, key):
    for item in expr[2:]:
        if isinstance(item, list) and item and item[0] == key:
            return item
    return None


def parse(domain_text: str, problem_text: str) -> ClassicalProblem:
    dom = _sexpr(domain_text)
    if dom[:1] != ["define"] or dom[1][:1] != ["domain"]:
        raise PddlSyntaxError("not a domain definition")
    preds = _section(dom, ":predicates")
    fluents = [p[0] for p in (preds[1:] if preds else [])]
    index = {f: i for i, f in enumerate(fluents)}
    actions = []
    for item in dom[2:]:
        if not (isinstance(item, list) and item and item[0] == ":action"):
            continue
        name = item[1]
        fields = dict(zip(item[2::2], item[3::2]))
        pre = _literals(fields.get(":precondition", ["and"]), index)
        eff = fields.get(":effect", ["and"])
        parts = eff[1:] if eff and eff[0] == "and" else [eff]
        plain, effects = [], []
        for part in parts:
            if part and part[0] == "when":
                effects.append(ConditionalEffect(_literals(part[1], index), _literals(part[2], index)))
            else:
                plain.append(part)
        uncond = _literals(["and"] + plain, index)
        if uncond:
            effects.insert(0, ConditionalEffect(EMPTY, uncond))
        actions.append(Action(name, pre, tuple(effects)))
    domain = Domain(dom[1][1], tuple(fluents), tuple(actions))

    prob = _sexpr(problem_text)
    if prob[:1] != ["define"] or prob[1][:1] != ["problem"]:
        raise PddlSyntaxError("not a problem definition")
    init = _section(prob, ":init")
    state = 0
    for atom in (init[1:] if init else []):
        if atom[0] not in index:
            raise PddlSyntaxError(f"unknown atom {atom!r} in :init")
        state |= 1 << index[atom[0]]
    goal = _section(prob, ":goal")
    return ClassicalProblem(domain, state, _literals(goal[1], index) if goal else EMPTY, prob[1][1])


def isomorphic(a: ClassicalProblem, b: ClassicalProblem) -> bool:
    """Same fluents (by sanitized name and order), actions, initial state and goal."""
    if sanitize_all(a.fluents) != list(b.fluents) or a.initial != b.initial or a.goal != b.goal:
        return False
    if len(a.actions) != len(b.actions):
        return False
    for x, y in zip(a.actions, b.actions):
        if sanitize(x.name) != y.name or x.precondition != y.precondition:
            return False
        if x._uncond != y._uncond or sorted(x._cond) != sorted(y._cond):
            return False
    return True


# ---------------------------------------------------------------------------
# plan files

class MalformedLine(ValueError):
    def __init__(self, lineno: int, text: str = ""):
        self.lineno = lineno
        super().__init__(f"line {lineno}: not a plan step: {text!r}")


_STEP = re.compile(r"^(?:\d+(?:\.\d+)?\s*:\s*)?\(\s*([^()\s]+)\s*\)(?:\s*\[[\d.]+\])?$")


def parse_plan(text: str) -> list[str]:
    """One ``(action-name)`` per line; blank lines and ``;`` comments are skipped."""
    steps = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        m = _STEP.match(line)
        if not m:
            raise MalformedLine(lineno, line)
        steps.append(m.group(1).lower())
    return steps


def format_plan(plan: Plan | list[str]) -> str:
    steps = plan.steps if isinstance(plan, Plan) else plan
    lines = [f"({sanitize(s)})" for s in steps]
    lines.append(f"; cost = {len(steps)} (unit cost)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# external planner adapter

class AdapterError(RuntimeError):
    pass


class Timeout(AdapterError):
    pass


class NonzeroExit(AdapterError):
    def __init__(self, returncode: int, output: str):
        self.returncode = returncode
        self.output = output
        super().__init__(f"planner exited with status {returncode}")


class PlanMissing(AdapterError):
    pass


class PlanInvalid(AdapterError):
    def __init__(self, step: int | None, reason: str):
        self.step = step
        self.reason = reason
        super().__init__(f"external plan invalid at step {step}: {reason}")


@dataclass(frozen=True)
class PlannerCommand:
    template: str
    timeout: float = 600.0
    workdir: str | None = None

    def __post_init__(self):
        for key in ("{domain}", "{problem}", "{plan}"):
            if key not in self.template:
                raise ValueError(f"planner command must contain {key}")


def solve_external(problem: ClassicalProblem, cmd: PlannerCommand, keep_files: bool = False) -> Plan:
    """Run an external planner on the emitted PDDL and return a validated plan."""
    pair = emit(problem)
    tmp = tempfile.mkdtemp(prefix="genplan-", dir=os.environ.get("GENPLAN_TMPDIR"))
    try:
        paths = {k: os.path.join(tmp, f) for k, f in
                 (("domain", "domain.pddl"), ("problem", "problem.pddl"), ("plan", "plan.txt"))}
        with open(paths["domain"], "w") as fh:
            fh.write(pair.domain_text)
        with open(paths["problem"], "w") as fh:
            fh.write(pair.problem_text)
        argv = shlex.split(cmd.template.format(**{k: shlex.quote(v) for k, v in paths.items()}))
        try:
            proc = subprocess.run(argv, cwd=cmd.workdir or tmp, capture_output=True, text=True,
                                  timeout=cmd.timeout)
        except subprocess.TimeoutExpired:
            raise Timeout(f"planner exceeded {cmd.timeout}s") from None
        if proc.returncode != 0:
            raise NonzeroExit(proc.returncode, proc.stdout + proc.stderr)
        if not os.path.exists(paths["plan"]):
            raise PlanMissing("planner finished without writing a plan file")
        with open(paths["plan"]) as fh:
            names = parse_plan(fh.read())
    finally:
        if not keep_files:
            shutil.rmtree(tmp, ignore_errors=True)
    by_name = {sanitize(a.name): a.name for a in problem.actions}
    steps = []
    for k, name in enumerate(names):
        if name not in by_name:
            raise PlanInvalid(k, f"UnknownAction: {name}")
        steps.append(by_name[name])
    check = validate_plan(problem, steps)
    if not check.solved:
        raise PlanInvalid(check.failed_step, check.reason)
    return Plan(tuple(steps), check.trace)
