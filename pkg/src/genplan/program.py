"""Planning programs: representation, text format and interpreter.

A program is a list of procedures (``main`` first), each a numbered list of
instructions: an action, a conditional goto ``goto(i,!(f))`` that jumps to
line ``i`` whenever ``f`` is false, a call ``p(v1,...)`` or ``end``. Calls
push a frame; arguments are copied by value into the callee's fixed
parameter variables, whose fluents are local to the stack level.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .model import (
    ConflictingEffects,
    Domain,
    GeneralizedProblem,
    Instance,
    applicable,
    successor,
)


# ---------------------------------------------------------------------------
# instructions and programs

@dataclass(frozen=True)
class Act:
    action: str

    def __str__(self):
        return self.action


@dataclass(frozen=True)
class Goto:
    target: int
    condition: str

    def __str__(self):
        return f"goto({self.target},!({self.condition}))"


@dataclass(frozen=True)
class Call:
    proc: int
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class End:
    def __str__(self):
        return "end"


Instruction = Union[Act, Goto, Call, End]


@dataclass(frozen=True)
class Param:
    domain: str
    var: str


@dataclass(frozen=True)
class Procedure:
    id: int
    name: str
    params: tuple[Param, ...] = ()
    # None marks an unprogrammed (nil) line
    lines: tuple[Instruction | None, ...] = ()

    def __post_init__(self):
        if self.id == 0 and self.params:
            raise ValueError("main cannot take parameters")
        for i, w in enumerate(self.lines):
            if isinstance(w, End) and i == 0:
                raise ValueError(f"{self.name}: end cannot occupy line 0")
            if isinstance(w, Goto) and not 0 <= w.target < len(self.lines):
                raise ValueError(f"{self.name}: goto target {w.target} is not a line")


class ProgramError(ValueError):
    pass


@dataclass(frozen=True)
class PlanningProgram:
    procedures: tuple[Procedure, ...]
    line_bound: int | None = None

    def __post_init__(self):
        if not self.procedures:
            raise ProgramError("a program needs a main procedure")
        for j, p in enumerate(self.procedures):
            if p.id != j:
                raise ProgramError("procedure ids must be dense and ordered")
            if self.line_bound is not None and len(p.lines) > self.line_bound + 1:
                raise ProgramError(f"{p.name} exceeds the line bound {self.line_bound}")
            for w in p.lines:
                if isinstance(w, Call):
                    if not 0 <= w.proc < len(self.procedures):
                        raise ProgramError(f"{p.name}: call to unknown procedure {w.proc}")
                    callee = self.procedures[w.proc]
                    if len(w.args) != len(callee.params):
                        raise ProgramError(
                            f"{p.name}: {callee.name} takes {len(callee.params)} arguments")

    @property
    def main(self) -> Procedure:
        return self.procedures[0]

    @property
    def proc_bound(self) -> int:
        return len(self.procedures) - 1

    def proc_index(self, name: str) -> int:
        for p in self.procedures:
            if p.name == name:
                return p.id
        raise KeyError(name)

    def has_calls(self) -> bool:
        return any(isinstance(w, Call) for p in self.procedures for w in p.lines)

    def instruction_text(self, w: Instruction | None) -> str:
        if w is None:
            return "nil"
        if isinstance(w, Call):
            name = self.procedures[w.proc].name
            return f"{name}({','.join(w.args)})" if w.args else name
        return str(w)

    def __str__(self):
        return format_program(self)


# ---------------------------------------------------------------------------
# text format

class ProgramSyntaxError(ProgramError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def format_program(program: PlanningProgram) -> str:
    out = []
    for p in program.procedures:
        header = f"proc {p.name}"
        if p.params:
            header += "(" + ",".join(f"{q.var}:{q.domain}" for q in p.params) + ")"
        out.append(header + " {")
        for i, w in enumerate(p.lines):
            out.append(f"  {i}. {program.instruction_text(w)}")
        out.append("}")
    return "\n".join(out) + "\n"


_HEADER = re.compile(r"proc\s+([A-Za-z_][\w-]*)\s*(?:\(([^)]*)\))?\s*\{", re.S)
_GOTO = re.compile(r"goto\((\d+),!\((.+)\)\)$")
_CALL = re.compile(r"([A-Za-z_][\w-]*)(?:\(([^()]*)\))?$")
_LINENO = re.compile(r"(\d+)\.$")


def parse_program(text: str, line_bound: int | None = None) -> PlanningProgram:
    """Parse the line-oriented program format.

    ``proc p1(aux:reg) { 0. dec(aux)  1. goto(0,!(aux=0))  2. end }``;
    line numbers are mandatory and must count up from 0.
    """
    # strip comments, keeping line numbering intact for messages
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    headers = []
    pos = 0
    while True:
        m = _HEADER.search(text, pos)
        if not m:
            rest = text[pos:].strip()
            if rest:
                raise ProgramSyntaxError(f"unexpected text {rest[:30]!r}", text.count("\n", 0, pos) + 1)
            break
        if text[pos:m.start()].strip():
            raise ProgramSyntaxError("text outside a procedure", text.count("\n", 0, pos) + 1)
        close = text.find("}", m.end())
        if close < 0:
            raise ProgramSyntaxError("missing '}'", text.count("\n", 0, m.start()) + 1)
        headers.append((m.group(1), m.group(2), m.end(), close))
        pos = close + 1
    if not headers:
        raise ProgramSyntaxError("no procedures")
    names = [h[0] for h in headers]
    if names[0] != "main":
        raise ProgramSyntaxError("the first procedure must be main", 1)
    if len(set(names)) != len(names):
        raise ProgramSyntaxError("duplicate procedure name")
    index = {n: j for j, n in enumerate(names)}

    procs = []
    for j, (name, params_txt, start, end) in enumerate(headers):
        params = []
        for chunk in (params_txt or "").split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if ":" not in chunk:
                raise ProgramSyntaxError(f"parameter {chunk!r} needs a domain (var:domain)",
                                         text.count("\n", 0, start) + 1)
            var, dom = (s.strip() for s in chunk.split(":", 1))
            params.append(Param(dom, var))
        lines: list = []
        body = text[start:end]
        tokens = [(tok, text.count("\n", 0, start + mt.start()) + 1)
                  for mt in re.finditer(r"\S+", body) for tok in [mt.group()]]
        if len(tokens) % 2:
            raise ProgramSyntaxError(f"{name}: every line needs a number and an instruction",
                                     tokens[-1][1])
        for k in range(0, len(tokens), 2):
            (num, lineno), (instr, _) = tokens[k], tokens[k + 1]
            m = _LINENO.match(num)
            if not m:
                raise ProgramSyntaxError(f"expected a line number, got {num!r}", lineno)
            if int(m.group(1)) != len(lines):
                raise ProgramSyntaxError(f"{name}: expected line {len(lines)}, got {num}", lineno)
            lines.append(_parse_instruction(instr, index, lineno))
        try:
            procs.append(Procedure(j, name, tuple(params), tuple(lines)))
        except ValueError as exc:
            raise ProgramSyntaxError(str(exc), text.count("\n", 0, start) + 1) from None
    try:
        return PlanningProgram(tuple(procs), line_bound)
    except ProgramError as exc:
        raise ProgramSyntaxError(str(exc)) from None


def _parse_instruction(tok: str, procs: dict, lineno: int) -> Instruction | None:
    if tok == "end":
        return End()
    if tok == "nil":
        return None
    if tok.startswith("goto"):
        m = _GOTO.match(tok)
        if not m:
            raise ProgramSyntaxError(f"malformed goto {tok!r} (expected goto(i,!(fluent)))", lineno)
        return Goto(int(m.group(1)), m.group(2))
    m = _CALL.match(tok)
    if m and m.group(1) in procs:
        args = tuple(a.strip() for a in (m.group(2) or "").split(",") if a.strip())
        return Call(procs[m.group(1)], args)
    return Act(tok)


def load_program(path, line_bound: int | None = None) -> PlanningProgram:
    with open(path) as fh:
        return parse_program(fh.read(), line_bound)


# ---------------------------------------------------------------------------
# interpreter

@dataclass(frozen=True)
class Frame:
    proc: int
    pc: int
    level: int
    # stack-local fluents of the caller, restored when this frame ends
    caller_locals: int = 0


@dataclass(frozen=True)
class ExecConfig:
    state: int
    stack: tuple[Frame, ...]

    def key(self):
        return (self.state, tuple((f.proc, f.pc, f.caller_locals) for f in self.stack))


@dataclass(frozen=True)
class Terminated:
    state: int
    steps: int
    trace: tuple[ExecConfig, ...] | None = None
    ok = True


@dataclass(frozen=True)
class FailedLoop:
    config: ExecConfig
    steps: int
    ok = False


@dataclass(frozen=True)
class FailedDepth:
    config: ExecConfig
    steps: int
    ok = False


@dataclass(frozen=True)
class FailedBudget:
    steps: int
    ok = False


@dataclass(frozen=True)
class FailedError:
    reason: str
    config: ExecConfig
    steps: int
    ok = False


ExecOutcome = Union[Terminated, FailedLoop, FailedDepth, FailedBudget, FailedError]


@dataclass(frozen=True)
class ExecLimits:
    max_depth: int = 64
    max_steps: int = 10**6


class BindError(ProgramError):
    pass


class BoundProgram:
    """A program resolved against a domain's actions, conditions and variables."""

    def __init__(self, program: PlanningProgram, domain: Domain):
        self.program = program
        self.domain = domain
        local = 0
        for p in program.procedures:
            for q in p.params:
                var = self._variable(q.var, p.name)
                if var.domain.name != q.domain:
                    raise BindError(f"{p.name}: {q.var} has domain {var.domain.name}, not {q.domain}")
                local |= var.mask
        self.locals = local
        self.code = [[self._bind(w, p) for w in p.lines] for p in program.procedures]

    def _variable(self, name, where):
        if not self.domain.has_variable(name):
            raise BindError(f"{where}: unknown variable {name!r}")
        return self.domain.variable(name)

    def _bind(self, w, proc):
        if w is None:
            return ("nil",)
        if isinstance(w, Act):
            if not self.domain.has_action(w.action):
                raise BindError(f"{proc.name}: unknown action {w.action!r}")
            return ("act", self.domain.action(w.action))
        if isinstance(w, Goto):
            try:
                return ("goto", w.target, self.domain.condition(w.condition))
            except KeyError:
                raise BindError(f"{proc.name}: unknown condition {w.condition!r}") from None
        if isinstance(w, Call):
            callee = self.program.procedures[w.proc]
            copies = []
            for arg, q in zip(w.args, callee.params):
                src = self._variable(arg, proc.name)
                dst = self._variable(q.var, callee.name)
                if src.domain.name != dst.domain.name:
                    raise BindError(f"{proc.name}: argument {arg} has the wrong domain for {callee.name}")
                copies += [(1 << a, 1 << b) for a, b in zip(src.fluents, dst.fluents)]
            return ("call", w.proc, tuple(copies))
        return ("end",)


def initial_config(state: int) -> ExecConfig:
    return ExecConfig(state, (Frame(0, 0, 1),))


def step(cfg: ExecConfig, bound: BoundProgram, max_depth: int = 64, steps: int = 0):
    """Execute one instruction; returns the next ExecConfig or an outcome."""
    state, stack = cfg.state, cfg.stack
    top = stack[-1]
    code = bound.code[top.proc]
    if top.pc >= len(code):
        return FailedError("pc past the last line", cfg, steps)
    w = code[top.pc]
    kind = w[0]
    if kind == "act":
        a = w[1]
        if not applicable(state, a):
            return FailedError(f"{a.name} not applicable", cfg, steps)
        try:
            state = successor(state, a)
        except ConflictingEffects as exc:
            return FailedError(str(exc), cfg, steps)
        return ExecConfig(state, stack[:-1] + (Frame(top.proc, top.pc + 1, top.level, top.caller_locals),))
    if kind == "goto":
        pc = w[1] if not w[2].holds(state) else top.pc + 1
        return ExecConfig(state, stack[:-1] + (Frame(top.proc, pc, top.level, top.caller_locals),))
    if kind == "call":
        if top.level >= max_depth:
            return FailedDepth(cfg, steps)
        copied = 0
        for src, dst in w[2]:
            if state & src:
                copied |= dst
        saved = state & bound.locals
        new_state = (state & ~bound.locals) | copied
        caller = Frame(top.proc, top.pc + 1, top.level, top.caller_locals)
        return ExecConfig(new_state, stack[:-1] + (caller, Frame(w[1], 0, top.level + 1, saved)))
    if kind == "end":
        if len(stack) == 1:
            return Terminated(state, steps + 1)
        state = (state & ~bound.locals) | top.caller_locals
        return ExecConfig(state, stack[:-1])
    return FailedError("unprogrammed line", cfg, steps)


def run(program: PlanningProgram | BoundProgram, problem: GeneralizedProblem | Domain,
        instance: Instance | int = 0, limits: ExecLimits = ExecLimits(),
        trace: bool = False) -> ExecOutcome:
    """Run from the instance's initial state until termination or failure.

    Failure on a repeated configuration uses the full configuration (state
    plus whole stack); for call-free programs this is exactly (state, pc).
    """
    domain = problem.domain if isinstance(problem, GeneralizedProblem) else problem
    if isinstance(instance, int):
        instance = problem.instances[instance]
    bound = program if isinstance(program, BoundProgram) else BoundProgram(program, domain)
    cfg = initial_config(instance.initial)
    seen = set()
    history = [cfg] if trace else None
    steps = 0
    while True:
        key = cfg.key()
        if key in seen:
            return FailedLoop(cfg, steps)
        seen.add(key)
        if steps >= limits.max_steps:
            return FailedBudget(steps)
        nxt = step(cfg, bound, limits.max_depth, steps)
        if isinstance(nxt, ExecConfig):
            steps += 1
            cfg = nxt
            if trace:
                history.append(cfg)
            continue
        if isinstance(nxt, Terminated):
            final = ExecConfig(nxt.state, ())
            if trace:
                history.append(final)
            return Terminated(nxt.state, nxt.steps, tuple(history) if trace else None)
        return nxt


@dataclass(frozen=True)
class InstanceReport:
    name: str
    outcome: ExecOutcome
    goal_holds: bool

    @property
    def solved(self) -> bool:
        return self.outcome.ok and self.goal_holds


@dataclass(frozen=True)
class SolveReport:
    instances: tuple[InstanceReport, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(r.solved for r in self.instances)

    def failures(self) -> list[InstanceReport]:
        return [r for r in self.instances if not r.solved]


def solves(program: PlanningProgram, gp: GeneralizedProblem,
           limits: ExecLimits = ExecLimits()) -> SolveReport:
    bound = BoundProgram(program, gp.domain)
    reports = []
    for t, inst in enumerate(gp.instances):
        out = run(bound, gp, inst, limits)
        goal = isinstance(out, Terminated) and inst.goal.holds(out.state)
        reports.append(InstanceReport(inst.name or f"#{t}", out, goal))
    return SolveReport(tuple(reports))


def flat_program(lines: Iterable[Instruction | None], line_bound: int | None = None) -> PlanningProgram:
    return PlanningProgram((Procedure(0, "main", (), tuple(lines)),), line_bound)
