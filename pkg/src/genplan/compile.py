"""Compiling planning-program synthesis into classical planning.

A plan for the compiled task both writes a program (programming actions
``P(w)`` fill an empty line) and simulates its execution (``R(w)`` repeats an
instruction already on the line) on every instance in turn. The nested
variant keeps a bounded call stack: per-level program counters ``pc_l<i>_k<k>``,
procedure markers, a ``top`` marker and per-level replicas of the stackable
fluents (the assignment fluents of procedure parameters).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Sequence

from .model import (
    EMPTY,
    Action,
    ClassicalProblem,
    Condition,
    ConditionalEffect,
    Domain,
    GeneralizedProblem,
    LiteralSet,
    Plan,
    bits,
)
from .names import NameCollision, sanitize
from .program import Act, Call, End, Goto, Instruction, Param, PlanningProgram, Procedure


class BadConfig(ValueError):
    pass


class TooLong(ValueError):
    pass


class UnknownInstruction(ValueError):
    pass


class Inconsistent(ValueError):
    pass


@dataclass(frozen=True)
class CompilationConfig:
    n: int
    b: int = 0
    m: int = 1
    split: bool = True
    one_level_only: bool = False
    # None: use the problem's condition pool / every domain action
    condition_pool: tuple[str, ...] | None = None
    action_pool: tuple[str, ...] | None = None
    gotos: bool = True
    # whether main may be called (recursion through main)
    call_main: bool = True
    flat: bool = False
    # optional per-procedure overrides: line bounds (each <= n), action
    # pools and condition pools (None entries fall back to the shared pools)
    proc_lines: tuple[int, ...] | None = None
    proc_actions: tuple | None = None
    proc_conditions: tuple | None = None

    def __post_init__(self):
        if self.n < 1:
            raise BadConfig("n must be at least 1")
        if self.m < 1 or self.b < 0:
            raise BadConfig("need m >= 1 and b >= 0")
        if self.one_level_only and self.m != 2:
            raise BadConfig("one-level procedure calls need m = 2")
        if self.b > 0 and self.m < 2:
            raise BadConfig("auxiliary procedures need a stack of size m >= 2")
        if self.flat and (self.b or self.m != 1):
            raise BadConfig("the flat compilation has no procedures or stack")
        if self.proc_lines is not None:
            if len(self.proc_lines) != self.b + 1:
                raise BadConfig("proc_lines needs one bound per procedure")
            if not all(1 <= x <= self.n for x in self.proc_lines):
                raise BadConfig("per-procedure line bounds must lie in 1..n")
        for extra in (self.proc_actions, self.proc_conditions):
            if extra is not None and len(extra) != self.b + 1:
                raise BadConfig("per-procedure pools need one entry per procedure")

    def lines_of(self, j: int) -> int:
        return self.n if self.proc_lines is None else self.proc_lines[j]


# ---------------------------------------------------------------------------
# fluent namespace

class CompiledFluentSpace:
    """Names of compiled fluents and the namespace key each one decodes to.

    Keys: ("base", f) | ("stack", f, k) | ("pc", i, k) | ("proc", j, k) |
    ("top", k) | ("ins", i, j, w) | ("gcond", i, j, c) | ("gtgt", i, j, t) |
    ("done",) | ("acc",) | ("eval",) | ("test", t). ``k``/``j`` are None in
    the flat compilation.
    """

    _PATTERNS = [
        ("pc", re.compile(r"pc_l(\d+)(?:_k(\d+))?$")),
        ("proc", re.compile(r"proc_j(\d+)_k(\d+)$")),
        ("top", re.compile(r"top_k(\d+)$")),
        ("ins", re.compile(r"ins_l(\d+)(?:_j(\d+))?_(.+)$")),
        ("gcond", re.compile(r"gcond_l(\d+)(?:_j(\d+))?_(.+)$")),
        ("gtgt", re.compile(r"gtgt_l(\d+)(?:_j(\d+))?_t(\d+)$")),
        ("test", re.compile(r"test_t(\d+)$")),
    ]

    def __init__(self, base_names: Sequence[str]):
        self.base_names = tuple(base_names)
        self.keys: list[tuple] = []
        self.names: list[str] = []
        self.ids: dict[tuple, int] = {}
        self._by_name: dict[str, int] = {}
        self._base_by_name: dict[str, int] = {}
        self._tokens: dict[str, str] = {}  # sanitized instruction/condition -> original
        for f, n in enumerate(self.base_names):
            s = sanitize(n)
            if s in self._base_by_name:
                raise NameCollision(f"{n!r} collides after sanitization")
            self._base_by_name[s] = f

    def token(self, text: str) -> str:
        s = sanitize(text)
        if self._tokens.setdefault(s, text) != text:
            raise NameCollision(f"{self._tokens[s]!r} and {text!r} both sanitize to {s!r}")
        return s

    def render(self, key: tuple) -> str:
        tag = key[0]
        sfx = lambda j, k: (f"_j{j}" if j is not None else "") + (f"_k{k}" if k is not None else "")
        if tag == "base":
            return sanitize(self.base_names[key[1]])
        if tag == "stack":
            return f"{sanitize(self.base_names[key[1]])}_k{key[2]}"
        if tag == "pc":
            return f"pc_l{key[1]}" + (f"_k{key[2]}" if key[2] is not None else "")
        if tag == "proc":
            return f"proc_j{key[1]}_k{key[2]}"
        if tag == "top":
            return f"top_k{key[1]}"
        if tag == "ins":
            return f"ins_l{key[1]}" + sfx(key[2], None) + "_" + self.token(key[3])
        if tag == "gcond":
            return f"gcond_l{key[1]}" + sfx(key[2], None) + "_" + self.token(key[3])
        if tag == "gtgt":
            return f"gtgt_l{key[1]}" + sfx(key[2], None) + f"_t{key[3]}"
        if tag == "test":
            return f"test_t{key[1]}"
        if tag in ("done", "acc", "eval"):
            return tag
        raise KeyError(key)

    def parse(self, name: str) -> tuple:
        if name in self._base_by_name:
            return ("base", self._base_by_name[name])
        if name in ("done", "acc", "eval"):
            return (name,)
        m = re.match(r"(.+)_k(\d+)$", name)
        if m and m.group(1) in self._base_by_name:
            return ("stack", self._base_by_name[m.group(1)], int(m.group(2)))
        for tag, pat in self._PATTERNS:
            m = pat.match(name)
            if not m:
                continue
            g = m.groups()
            num = lambda x: None if x is None else int(x)
            if tag == "pc":
                return ("pc", int(g[0]), num(g[1]))
            if tag in ("proc",):
                return ("proc", int(g[0]), int(g[1]))
            if tag == "top":
                return ("top", int(g[0]))
            if tag in ("ins", "gcond"):
                if g[2] not in self._tokens:
                    continue
                return (tag, int(g[0]), num(g[1]), self._tokens[g[2]])
            if tag == "gtgt":
                return ("gtgt", int(g[0]), num(g[1]), int(g[2]))
            if tag == "test":
                return ("test", int(g[0]))
        raise KeyError(f"not a compiled fluent name: {name!r}")

    def add(self, key: tuple) -> int:
        if key in self.ids:
            return self.ids[key]
        name = self.render(key)
        if name in self._by_name:
            raise NameCollision(f"compiled fluent {name!r} is ambiguous")
        fid = len(self.names)
        self.ids[key] = fid
        self.keys.append(key)
        self.names.append(name)
        self._by_name[name] = fid
        return fid

    def __getitem__(self, key: tuple) -> int:
        return self.ids[key]

    def __len__(self):
        return len(self.names)


@dataclass(frozen=True)
class DecodeEntry:
    mode: str  # "P" programs and executes, "R" repeats
    op: str  # act | goto | eval | jmp | call | end
    line: int
    proc: int
    level: int
    instruction: Instruction | None
    instance: int | None = None


@dataclass(frozen=True)
class CompiledTask:
    task: ClassicalProblem
    decode_table: dict
    config: CompilationConfig
    space: CompiledFluentSpace
    skeleton: tuple[Procedure, ...]
    source: GeneralizedProblem
    stackable: int = 0
    dck: tuple = ()

    def actions_of(self, mode=None, op=None) -> list[str]:
        return [name for name, e in self.decode_table.items()
                if (mode is None or e.mode == mode) and (op is None or e.op == op)]


# ---------------------------------------------------------------------------
# compiler

def default_skeleton(b: int) -> tuple[Procedure, ...]:
    return tuple(Procedure(j, "main" if j == 0 else f"p{j}") for j in range(b + 1))


class _Compiler:
    def __init__(self, gp: GeneralizedProblem, skeleton: Sequence[Procedure], cfg: CompilationConfig):
        self.gp = gp
        self.cfg = cfg
        self.dom = gp.domain
        self.skeleton = tuple(Procedure(p.id, p.name, p.params) for p in skeleton)
        if len(self.skeleton) != cfg.b + 1:
            raise BadConfig(f"skeleton has {len(self.skeleton)} procedures, expected b+1 = {cfg.b + 1}")
        pool = gp.condition_pool if cfg.condition_pool is None else cfg.condition_pool
        if cfg.gotos and not pool and cfg.proc_conditions is None:
            raise BadConfig("gotos requested with an empty condition pool")
        names = [a.name for a in self.dom.actions] if cfg.action_pool is None else list(cfg.action_pool)
        self.pools, self.action_sets = [], []
        for j in range(cfg.b + 1):
            pj = pool
            if cfg.proc_conditions is not None and cfg.proc_conditions[j] is not None:
                pj = cfg.proc_conditions[j]
            self.pools.append([self.dom.condition(c) for c in pj] if cfg.gotos else [])
            aj = names
            if cfg.proc_actions is not None and cfg.proc_actions[j] is not None:
                aj = cfg.proc_actions[j]
            self.action_sets.append([self.dom.action(a) for a in aj])
        self.T = len(gp.instances)
        if self.T == 0:
            raise BadConfig("no instances to compile")

        K = 0
        for p in self.skeleton:
            for q in p.params:
                var = self.dom.variable(q.var)
                if var.domain.name != q.domain:
                    raise BadConfig(f"{p.name}: parameter {q.var} is not of domain {q.domain}")
                K |= var.mask
        self.K = K
        self.flat = cfg.flat
        self.space = CompiledFluentSpace(self.dom.fluents)
        self.actions: list[tuple] = []
        self.table: dict[str, DecodeEntry] = {}
        self._lift_cache: dict = {}

    # fluent helpers --------------------------------------------------------
    def f(self, *key) -> int:
        return self.space.add(tuple(key))

    def lvl(self, k):
        return None if self.flat else k

    def base_id(self, f: int, k: int) -> int:
        if self.K >> f & 1:
            return self.f("stack", f, k)
        return self.f("base", f)

    def lift(self, ls: LiteralSet, k: int) -> LiteralSet:
        key = (ls.pos, ls.neg, k)
        out = self._lift_cache.get(key)
        if out is None:
            pos = neg = 0
            for f in bits(ls.pos):
                pos |= 1 << self.base_id(f, k)
            for f in bits(ls.neg):
                neg |= 1 << self.base_id(f, k)
            out = self._lift_cache[key] = LiteralSet(pos, neg)
        return out

    def lits(self, pos=(), neg=()) -> LiteralSet:
        p = n = 0
        for x in pos:
            p |= 1 << x
        for x in neg:
            n |= 1 << x
        return LiteralSet(p, n)

    def pc(self, i, k):
        return self.f("pc", i, self.lvl(k))

    def ins(self, i, j, text):
        return self.f("ins", i, None if self.flat else j, text)

    def ctrl(self, i, j, k) -> list[int]:
        if self.flat:
            return [self.pc(i, k)]
        return [self.f("top", k), self.pc(i, k), self.f("proc", j, k)]

    def advance(self, i, k) -> ConditionalEffect:
        return ConditionalEffect(EMPTY, self.lits([self.pc(i + 1, k)], [self.pc(i, k)]))

    def name(self, mode, token, i, j, k, extra=""):
        s = f"{mode.lower()}_{token}_l{i}"
        if not self.flat:
            s += f"_j{j}_k{k}"
        return s + extra

    # emission ----------------------------------------------------------------
    _RANK = {"act": 0, "goto": 1, "eval": 2, "jmp": 3, "call": 4, "end": 5}

    def emit(self, entry: DecodeEntry, name: str, pre: LiteralSet, effects: list[ConditionalEffect]):
        if name in self.table:
            raise NameCollision(f"action name {name!r} generated twice")
        self.table[name] = entry
        self.actions.append(((self._RANK[entry.op], entry.line, entry.proc, entry.level, name),
                             Action(name, pre, tuple(effects))))

    def emit_pr(self, op, i, j, k, w, token, ins_id, pre, effects, program_pre=(),
                program_effects=None, extra="", instance=None):
        """Emit the P and R versions of executing instruction ``w``."""
        nil = self.ins(i, j, "nil")
        p_eff = list(program_effects if program_effects is not None else effects)
        p_eff.append(ConditionalEffect(EMPTY, self.lits(program_pre, [nil])))
        self.emit(DecodeEntry("P", op, i, j, k, w, instance), self.name("P", token, i, j, k, extra),
                  pre | self.lits([nil]), p_eff)
        if ins_id is not None:
            self.emit(DecodeEntry("R", op, i, j, k, w, instance), self.name("R", token, i, j, k, extra),
                      pre | self.lits([ins_id]), effects)

    def levels_of(self, j):
        """Stack levels at which procedure j can run."""
        cfg = self.cfg
        if self.flat:
            return [None]
        if cfg.one_level_only:
            return [1] if j == 0 else [2]
        if j == 0:
            return list(range(1, cfg.m + 1)) if cfg.call_main else [1]
        return list(range(2, cfg.m + 1))

    def callees(self, j):
        cfg = self.cfg
        if self.flat:
            return []
        if cfg.one_level_only:
            return list(range(1, cfg.b + 1)) if j == 0 else []
        return [jj for jj in range(cfg.b + 1) if jj > 0 or cfg.call_main]

    def arg_combos(self, callee: Procedure):
        choices = []
        for q in callee.params:
            choices.append([v for v in self.dom.variables if v.domain.name == q.domain])
        return list(itertools.product(*choices))

    def eval_effects(self, cond: Condition, k) -> list[ConditionalEffect]:
        acc = self.f("acc")
        out = []
        if not cond.indirect:
            out.append(ConditionalEffect(self.lift(LiteralSet(1 << cond.fluent), k), self.lits([acc])))
        else:
            for sel, tgt in cond.cases:
                if tgt is not None:
                    out.append(ConditionalEffect(self.lift(sel | LiteralSet(1 << tgt), k), self.lits([acc])))
        out.append(ConditionalEffect(EMPTY, self.lits([self.f("eval")])))
        return out

    def jmp_effects(self, i, t, k) -> list[ConditionalEffect]:
        acc, ev = self.f("acc"), self.f("eval")
        pci, nxt, tgt = self.pc(i, k), self.pc(i + 1, k), self.pc(t, k)
        if t == i:
            return [ConditionalEffect(EMPTY, self.lits([], [ev])),
                    ConditionalEffect(self.lits([acc]), self.lits([nxt], [pci, acc]))]
        return [ConditionalEffect(EMPTY, self.lits([], [pci, ev])),
                ConditionalEffect(self.lits([], [acc]), self.lits([tgt])),
                ConditionalEffect(self.lits([acc]), self.lits([nxt], [acc]))]

    def goto_effects(self, i, t, cond: Condition, k) -> list[ConditionalEffect]:
        """Single-action conditional jump: to ``t`` if the condition is false."""
        pci, nxt, tgt = self.pc(i, k), self.pc(i + 1, k), self.pc(t, k)
        if not cond.indirect:
            f = self.lift(LiteralSet(1 << cond.fluent), k).pos
            true_cases, false_cases = [LiteralSet(f)], [LiteralSet(0, f)]
        else:
            true_cases, false_cases = [], []
            for sel, target in cond.cases:
                if target is None:
                    false_cases.append(self.lift(sel, k))
                else:
                    false_cases.append(self.lift(sel | LiteralSet(0, 1 << target), k))
                    true_cases.append(self.lift(sel | LiteralSet(1 << target), k))
            if all(sel.neg == 0 and sel.pos.bit_count() == 1 for sel, _ in cond.cases):
                none = 0
                for sel, _ in cond.cases:
                    none |= sel.pos
                false_cases.append(self.lift(LiteralSet(0, none), k))
        if t == i:
            return [ConditionalEffect(c, self.lits([nxt], [pci])) for c in true_cases]
        out = [ConditionalEffect(EMPTY, self.lits([], [pci]))]
        out += [ConditionalEffect(c, self.lits([tgt])) for c in false_cases]
        out += [ConditionalEffect(c, self.lits([nxt])) for c in true_cases]
        return out

    def build_line_actions(self, i, j, k):
        n, cfg = self.cfg.lines_of(j), self.cfg
        ctrl = self.ctrl(i, j, k)
        if i < n:
            for a in self.action_sets[j]:
                tok = self.space.token(a.name)
                pre = self.lift(a.precondition, k) | self.lits(ctrl)
                eff = [ConditionalEffect(self.lift(ce.condition, k), self.lift(ce.effect, k))
                       for ce in a.effects] + [self.advance(i, k)]
                ins = self.ins(i, j, a.name)
                self.emit_pr("act", i, j, k, Act(a.name), tok, ins, pre, eff, program_pre=[ins])

            for cond in self.pools[j]:
                ctok = self.space.token(cond.name)
                for t in range(n):
                    w = Goto(t, cond.name)
                    if not cfg.split:
                        ins = self.ins(i, j, str(w))
                        eff = self.goto_effects(i, t, cond, k)
                        self.emit_pr("goto", i, j, k, w, f"goto_t{t}_{ctok}", ins,
                                     self.lits(ctrl), eff, program_pre=[ins])
                    else:
                        jj = None if self.flat else j
                        gc, gt = self.f("gcond", i, jj, cond.name), self.f("gtgt", i, jj, t)
                        pre = self.lits(ctrl, [self.f("eval")])
                        self.emit_pr("goto", i, j, k, w, f"goto_t{t}_{ctok}", None, pre, [],
                                     program_pre=[gc, gt], program_effects=self.eval_effects(cond, k))
            if cfg.split and self.pools[j]:
                jj = None if self.flat else j
                for cond in self.pools[j]:
                    gc = self.f("gcond", i, jj, cond.name)
                    self.emit(DecodeEntry("R", "eval", i, j, k, None),
                              self.name("R", f"eval_{self.space.token(cond.name)}", i, j, k),
                              self.lits(ctrl + [gc], [self.f("eval")]), self.eval_effects(cond, k))
                for t in range(n):
                    gt = self.f("gtgt", i, jj, t)
                    self.emit(DecodeEntry("R", "jmp", i, j, k, None),
                              self.name("R", f"jmp_t{t}", i, j, k),
                              self.lits(ctrl + [gt, self.f("eval")]), self.jmp_effects(i, t, k))

            if not self.flat and k < cfg.m:
                for jp in self.callees(j):
                    callee = self.skeleton[jp]
                    for args in self.arg_combos(callee):
                        w = Call(jp, tuple(v.name for v in args))
                        text = self.call_text(w)
                        ins = self.ins(i, j, text)
                        eff = [ConditionalEffect(EMPTY, self.lits(
                            [self.pc(i + 1, k), self.f("top", k + 1), self.pc(0, k + 1), self.f("proc", jp, k + 1)],
                            [self.pc(i, k), self.f("top", k)]))]
                        for v, q in zip(args, callee.params):
                            u = self.dom.variable(q.var)
                            for a, b in zip(v.fluents, u.fluents):
                                eff.append(ConditionalEffect(self.lits([self.base_id(a, k)]),
                                                             self.lits([self.base_id(b, k + 1)])))
                        self.emit_pr("call", i, j, k, w, self.space.token(text).replace("-", "_"), ins,
                                     self.lits(ctrl), eff, program_pre=[ins])
        if i >= 1:
            ins = self.ins(i, j, "end")
            if self.flat or k == 1:
                self.build_main_end(i, j, k, ctrl, ins)
            else:
                clear = [self.f("stack", f, k) for f in bits(self.K)]
                eff = [ConditionalEffect(EMPTY, self.lits(
                    [self.f("top", k - 1)],
                    [self.f("top", k), self.pc(i, k), self.f("proc", j, k)] + clear))]
                self.emit_pr("end", i, j, k, End(), "end", ins, self.lits(ctrl), eff, program_pre=[ins])

    def call_text(self, w: Call) -> str:
        name = self.skeleton[w.proc].name
        return f"call-{name}({','.join(w.args)})" if w.args else f"call-{name}"

    def build_main_end(self, i, j, k, ctrl, ins):
        T = self.T
        done = self.f("done")
        for t in range(T):
            pre = self.lits(ctrl)
            extra = ""
            if T > 1:
                pre = pre | self.lits([self.f("test", t + 1)])
                extra = f"_inst{t + 1}"
            if t + 1 < T:
                pre = pre | self.lift(self.gp.instances[t].goal, 1)
                nxt = self.gp.instances[t + 1].initial
                on = [self.pc(0, k), self.f("test", t + 2)]
                off = [self.pc(i, k), self.f("test", t + 1)]
                for f in range(len(self.dom.fluents)):
                    (on if nxt >> f & 1 else off).append(self.base_id(f, 1))
                eff = [ConditionalEffect(EMPTY, self.lits(on, off))]
            else:
                eff = [ConditionalEffect(EMPTY, self.lits([done]))]
            self.emit_pr("end", i, j, k, End(), "end", ins, pre, eff, program_pre=[ins],
                         extra=extra, instance=t + 1)

    def build(self) -> CompiledTask:
        cfg = self.cfg
        # register fluents in a stable order: base/stack, control, ins
        for f in range(len(self.dom.fluents)):
            if self.K >> f & 1:
                for k in range(1, cfg.m + 1):
                    self.f("stack", f, k)
            else:
                self.f("base", f)
        for k in ([None] if self.flat else range(1, cfg.m + 1)):
            if not self.flat:
                self.f("top", k)
            for i in range(cfg.n + 1):
                self.f("pc", i, k)
            if not self.flat:
                for j in range(cfg.b + 1):
                    self.f("proc", j, k)
        self.f("done")
        if cfg.split and any(self.pools):
            self.f("acc")
            self.f("eval")
        if self.T > 1:
            for t in range(1, self.T + 1):
                self.f("test", t)
        for j in range(cfg.b + 1):
            for i in range(cfg.lines_of(j) + 1):
                self.ins(i, j, "nil")

        for j in range(cfg.b + 1):
            for k in self.levels_of(j):
                for i in range(cfg.lines_of(j) + 1):
                    self.build_line_actions(i, j, k)

        self.actions.sort(key=lambda x: x[0])
        actions = tuple(a for _, a in self.actions)

        first = self.gp.instances[0]
        init = 0
        for f in bits(first.initial):
            init |= 1 << self.base_id(f, 1)
        for j in range(cfg.b + 1):
            for i in range(cfg.lines_of(j) + 1):
                init |= 1 << self.ins(i, j, "nil")
        init |= 1 << self.pc(0, 1)
        if not self.flat:
            init |= 1 << self.f("top", 1) | 1 << self.f("proc", 0, 1)
        if self.T > 1:
            init |= 1 << self.f("test", 1)
        goal = self.lift(self.gp.instances[-1].goal, 1) | self.lits([self.f("done")])

        domain = Domain(f"{sanitize(self.dom.name)}-compiled", tuple(self.space.names), actions)
        task = ClassicalProblem(domain, init, goal, f"{sanitize(self.gp.name or self.dom.name)}-n{cfg.n}")
        return CompiledTask(task, self.table, cfg, self.space, self.skeleton, self.gp, self.K)


def compile_flat(gp: GeneralizedProblem, n: int, condition_pool: Sequence[str] | None = None,
                 split: bool = True, action_pool: Sequence[str] | None = None) -> CompiledTask:
    """Flat compilation: one procedure, no stack, unlevelled fluent names.

    An explicitly empty ``condition_pool`` asks for straight-line programs.
    """
    gotos = condition_pool is None or len(condition_pool) > 0
    cfg = CompilationConfig(n=n, split=split, flat=True, gotos=gotos,
                            condition_pool=None if condition_pool is None else tuple(condition_pool),
                            action_pool=None if action_pool is None else tuple(action_pool))
    return _Compiler(gp, default_skeleton(0), cfg).build()


def compile_nested(gp: GeneralizedProblem, skeleton: Sequence[Procedure] | None,
                   cfg: CompilationConfig) -> CompiledTask:
    if cfg.flat:
        raise BadConfig("use compile_flat for the flat compilation")
    skeleton = default_skeleton(cfg.b) if skeleton is None else skeleton
    return _Compiler(gp, skeleton, cfg).build()


def eval_jmp_actions(i: int, condition_pool: Sequence[Condition], n: int) -> list[Action]:
    """The bare eval/jmp pair actions for line ``i`` over fluents named pc_l*, acc, eval.

    Conditions must be plain fluents here; fluent ids refer to a local table
    ``[pc_l0..pc_ln, acc, eval, *pool]``.
    """
    pc = list(range(n + 1))
    acc, ev = n + 1, n + 2
    out = []
    for c_idx, cond in enumerate(condition_pool):
        f = n + 3 + c_idx
        out.append(Action(f"eval_{sanitize(cond.name)}_l{i}", LiteralSet(1 << pc[i], 1 << ev), (
            ConditionalEffect(LiteralSet(1 << f), LiteralSet(1 << acc)),
            ConditionalEffect(EMPTY, LiteralSet(1 << ev)))))
    for t in range(n):
        if t == i:
            eff = (ConditionalEffect(EMPTY, LiteralSet(0, 1 << ev)),
                   ConditionalEffect(LiteralSet(1 << acc), LiteralSet(1 << pc[i + 1], 1 << pc[i] | 1 << acc)))
        else:
            eff = (ConditionalEffect(EMPTY, LiteralSet(0, 1 << pc[i] | 1 << ev)),
                   ConditionalEffect(LiteralSet(0, 1 << acc), LiteralSet(1 << pc[t])),
                   ConditionalEffect(LiteralSet(1 << acc), LiteralSet(1 << pc[i + 1], 1 << acc)))
        out.append(Action(f"jmp_t{t}_l{i}", LiteralSet(1 << pc[i] | 1 << ev), eff))
    return out


def eval_jmp_fluents(condition_pool: Sequence[Condition], n: int) -> list[str]:
    return [f"pc_l{i}" for i in range(n + 1)] + ["acc", "eval"] + [c.name for c in condition_pool]


# ---------------------------------------------------------------------------
# DCK injection and decoding

def _line_fluents(ct: CompiledTask, i: int, j: int, w: Instruction) -> list[int]:
    space, cfg = ct.space, ct.config
    jj = None if cfg.flat else j
    if isinstance(w, Goto) and cfg.split:
        keys = [("gcond", i, jj, w.condition), ("gtgt", i, jj, w.target)]
    elif isinstance(w, Act):
        keys = [("ins", i, jj, w.action)]
    elif isinstance(w, Goto):
        keys = [("ins", i, jj, str(w))]
    elif isinstance(w, Call):
        name = ct.skeleton[w.proc].name
        text = f"call-{name}({','.join(w.args)})" if w.args else f"call-{name}"
        keys = [("ins", i, jj, text)]
    else:
        keys = [("ins", i, jj, "end")]
    try:
        return [space[k] for k in keys]
    except KeyError:
        raise UnknownInstruction(f"line {i} of procedure {j}: {w} is not available in this compilation") from None


def inject_dck(ct: CompiledTask, procedures: Sequence[Procedure]) -> CompiledTask:
    """Pre-program lines in the initial state; actions are left untouched."""
    init = ct.task.initial
    dck = dict(ct.dck)
    for proc in procedures:
        if not 0 <= proc.id < len(ct.skeleton):
            raise UnknownInstruction(f"no procedure slot {proc.id} in this compilation")
        slot = ct.skeleton[proc.id]
        if slot.params != proc.params:
            raise UnknownInstruction(f"{proc.name}: parameters differ from the compiled signature")
        n = ct.config.lines_of(proc.id)
        if len(proc.lines) > n + 1:
            raise TooLong(f"{proc.name} has {len(proc.lines)} lines, the bound allows {n + 1}")
        for i, w in enumerate(proc.lines):
            if w is None:
                continue
            if ct.config.one_level_only and isinstance(w, Call) and proc.id != 0:
                raise UnknownInstruction(f"{proc.name}: nested call with one-level procedure calls")
            nil = ct.space[("ins", i, None if ct.config.flat else proc.id, "nil")]
            if not init >> nil & 1:
                raise UnknownInstruction(f"{proc.name}: line {i} is already programmed")
            init &= ~(1 << nil)
            for f in _line_fluents(ct, i, proc.id, w):
                init |= 1 << f
        dck[proc.id] = Procedure(proc.id, slot.name, slot.params, proc.lines)
    task = replace(ct.task, initial=init)
    return replace(ct, task=task, dck=tuple(sorted(dck.items())))


def decode(plan: Plan | Sequence[str], ct: CompiledTask) -> PlanningProgram:
    steps = plan.steps if isinstance(plan, Plan) else tuple(plan)
    lines: dict[tuple[int, int], Instruction] = {}
    for j, proc in ct.dck:
        for i, w in enumerate(proc.lines):
            if w is not None:
                lines[(j, i)] = w
    programmed = set()
    for name in steps:
        try:
            e = ct.decode_table[name]
        except KeyError:
            raise Inconsistent(f"{name!r} is not an action of the compiled task") from None
        if e.mode != "P":
            continue
        if (e.proc, e.line) in programmed or (e.proc, e.line) in lines:
            raise Inconsistent(f"line {e.line} of procedure {e.proc} programmed twice")
        programmed.add((e.proc, e.line))
        lines[(e.proc, e.line)] = e.instruction
    procs = []
    for slot in ct.skeleton:
        mine = {i: w for (j, i), w in lines.items() if j == slot.id}
        length = max(mine, default=-1) + 1
        for w in mine.values():
            if isinstance(w, Goto):
                length = max(length, w.target + 1)
        procs.append(Procedure(slot.id, slot.name, slot.params,
                               tuple(mine.get(i) for i in range(length))))
    return PlanningProgram(tuple(procs), ct.config.n)


def stack_params(program: PlanningProgram) -> tuple[Procedure, ...]:
    """The skeleton (names and parameter lists) of a program."""
    return tuple(Procedure(p.id, p.name, p.params) for p in program.procedures)


__all__ = [
    "BadConfig", "CompilationConfig", "CompiledFluentSpace", "CompiledTask", "DecodeEntry",
    "Inconsistent", "TooLong", "UnknownInstruction", "compile_flat", "compile_nested",
    "decode", "default_skeleton", "eval_jmp_actions", "eval_jmp_fluents", "inject_dck",
    "stack_params", "Param",
]
