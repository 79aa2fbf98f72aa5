"""Command-line interface: compile, synth, pipeline, run, verify, enumerate, self-solve.

Exit codes: 0 solved and verified, 2 search limit or unsolvable, 3 verification
failure, 4 configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import jsonschema

from .compile import (
    BadConfig,
    CompilationConfig,
    CompiledTask,
    Inconsistent,
    TooLong,
    UnknownInstruction,
    compile_flat,
    compile_nested,
    decode,
    inject_dck,
)
from .domains import BadParams, DomainRecipe, make_recipe
from .model import GeneralizedProblem, Instance, PlanningError
from .names import NameCollision
from .pddl import AdapterError, PlannerCommand, emit, format_plan, parse, solve_external
from .planner import LimitHit, SearchLimits, SearchStats, Unsolvable, enumerate_programs, agrees, solve
from .program import (
    Call,
    ExecLimits,
    PlanningProgram,
    Procedure,
    ProgramError,
    format_program,
    parse_program,
    run,
    solves,
)

EXIT_OK, EXIT_LIMIT, EXIT_VERIFY, EXIT_CONFIG = 0, 2, 3, 4


class ConfigError(Exception):
    pass


class VerificationFailed(Exception):
    def __init__(self, message: str, failures=()):
        self.failures = list(failures)
        super().__init__(message)


# ---------------------------------------------------------------------------
# manifest

_INSTANCE = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "init": {"type": "array", "items": {"type": "string"}},
        "goal": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["init", "goal"],
    "additionalProperties": False,
}
_NAMES = {"type": "array", "items": {"type": "string"}}

MANIFEST_SCHEMA = {
    "type": "object",
    "properties": {
        "domain": {"type": "string"},
        "params": {"type": ["string", "object"]},
        "instances": {"type": "array", "items": _INSTANCE, "minItems": 1},
        "heldout": {"type": "array", "items": _INSTANCE},
        "config": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "b": {"type": "integer", "minimum": 0},
                "m": {"type": "integer", "minimum": 1},
                "split": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "condition_pool": _NAMES,
        "action_pool": _NAMES,
        "dck": _NAMES,
        "planner_cmd": {"type": "string"},
        "planner_timeout": {"type": "number", "exclusiveMinimum": 0},
        "algorithm": {"enum": ["gbfs", "bfs"]},
        "limits": {
            "type": "object",
            "properties": {
                "max_expansions": {"type": "integer", "minimum": 1},
                "max_seconds": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "required": ["domain"],
    "additionalProperties": False,
}


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def locate(text: str, path) -> int:
    """1-based line of the JSON value at ``path`` (keys and indices)."""
    dec = json.JSONDecoder()
    i = _skip_ws(text, 0)
    for key in path:
        if i >= len(text) or text[i] not in "{[":
            break
        obj = text[i] == "{"
        i = _skip_ws(text, i + 1)
        k = 0
        found = False
        while i < len(text) and text[i] not in "}]":
            if obj:
                name, i = json.decoder.scanstring(text, i + 1)
                i = _skip_ws(text, _skip_ws(text, i) + 1)
            if (name if obj else k) == key:
                found = True
                break
            _, i = dec.raw_decode(text, i)
            i = _skip_ws(text, i)
            if i < len(text) and text[i] == ",":
                i = _skip_ws(text, i + 1)
            k += 1
        if not found:
            break
    return text.count("\n", 0, i) + 1


def load_manifest(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
    errors = sorted(jsonschema.Draft7Validator(MANIFEST_SCHEMA).iter_errors(data),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        where = "/".join(map(str, e.absolute_path)) or "<root>"
        raise ConfigError(f"{path}:{locate(text, list(e.absolute_path))}: {where}: {e.message}")
    data["_path"] = path
    data["_text"] = text
    return data


# ---------------------------------------------------------------------------
# jobs

@dataclass
class Job:
    recipe: DomainRecipe
    problem: GeneralizedProblem
    heldout: GeneralizedProblem | None
    n: int
    b: int = 0
    m: int = 1
    split: bool = True
    condition_pool: tuple | None = None
    action_pool: tuple | None = None
    dck: tuple[Procedure, ...] = ()
    planner: PlannerCommand | None = None
    algorithm: str = "gbfs"
    limits: SearchLimits = field(default_factory=SearchLimits)


def _instances(domain, items, where, manifest):
    out = []
    for k, item in enumerate(items):
        try:
            s = domain.state(item["init"])
            g = domain.lits(*item["goal"])
        except (KeyError, ValueError, PlanningError) as exc:
            line = locate(manifest["_text"], [where, k])
            raise ConfigError(f"{manifest['_path']}:{line}: {where}[{k}]: {exc}") from None
        out.append(Instance(s, g, item.get("name", f"{where}{k}")))
    return tuple(out)


def _load_dck(paths) -> tuple[Procedure, ...]:
    procs: list[Procedure] = []
    for path in paths:
        try:
            with open(path) as fh:
                prog = parse_program(fh.read())
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
        except (ProgramError, ValueError) as exc:
            line = getattr(exc, "line", None)
            raise ConfigError(f"{path}:{line or 1}: {exc}") from None
        # only auxiliary procedures are injected; main is always synthesized
        procs += [p for p in prog.procedures if p.id > 0]
    return tuple(procs)


def build_job(args) -> Job:
    manifest = load_manifest(args.manifest) if getattr(args, "manifest", None) else {}
    name = args.domain or manifest.get("domain")
    if not name:
        raise ConfigError("no domain given (use --domain or a manifest)")
    params = args.params if args.params is not None else manifest.get("params")
    try:
        recipe = make_recipe(name, params)
    except BadParams as exc:
        raise ConfigError(f"domain {name}: {exc}") from None
    problem, heldout = recipe.problem, recipe.heldout
    if "instances" in manifest:
        problem = problem.with_instances(_instances(problem.domain, manifest["instances"], "instances", manifest))
    if "heldout" in manifest:
        heldout = problem.with_instances(_instances(problem.domain, manifest["heldout"], "heldout", manifest))
    if getattr(args, "no_holdout", False):
        heldout = None
    cfg = manifest.get("config", {})
    dck = _load_dck(list(manifest.get("dck", [])) + list(getattr(args, "dck", None) or []))
    n = _pick(getattr(args, "lines", None), cfg.get("n"), recipe.lines)
    sig_b = len(recipe.signature.procedures) - 1 if recipe.signature is not None else 0
    b = _pick(getattr(args, "procs", None), cfg.get("b"), max([p.id for p in dck] + [sig_b]))
    m = _pick(getattr(args, "stack", None), cfg.get("m"), recipe.stack if b or recipe.stack > 1 else 1)
    if b > 0 and m < 2:
        m = 2
    split = _pick(getattr(args, "split", None), cfg.get("split"), True)
    limits = SearchLimits(
        max_expansions=_pick(getattr(args, "max_expansions", None),
                             manifest.get("limits", {}).get("max_expansions"), 10**7),
        max_seconds=_pick(getattr(args, "max_seconds", None),
                          manifest.get("limits", {}).get("max_seconds"), 3600))
    template = _pick(getattr(args, "planner_cmd", None), manifest.get("planner_cmd"), None)
    planner = None
    if template:
        try:
            planner = PlannerCommand(template, manifest.get("planner_timeout", 600.0))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    pool = manifest.get("condition_pool")
    actions = manifest.get("action_pool")
    return Job(recipe, problem, heldout, n, b, m, split,
               None if pool is None else tuple(pool),
               tuple(actions) if actions is not None else recipe.action_pool,
               dck, planner, _pick(getattr(args, "algorithm", None), manifest.get("algorithm"), "gbfs"),
               limits)


def _pick(*values):
    for v in values:
        if v is not None:
            return v
    return None


# ---------------------------------------------------------------------------
# compile / synthesize

def fixed_procedures(job: Job) -> tuple[Procedure, ...]:
    """Injected procedures: DCK files first, then fixed bodies from the recipe signature."""
    procs = {p.id: p for p in job.dck}
    sig = job.recipe.signature
    if sig is not None and job.b == len(sig.procedures) - 1:
        for p in sig.procedures:
            if p.lines and p.id not in procs:
                procs[p.id] = p
    return tuple(procs[j] for j in sorted(procs))


def compile_job(job: Job) -> CompiledTask:
    pool = job.condition_pool if job.condition_pool is not None else job.recipe.condition_pool
    fixed = fixed_procedures(job)
    if job.b == 0 and job.m == 1 and not fixed:
        return compile_flat(job.problem, job.n, condition_pool=pool, split=job.split, action_pool=job.action_pool)
    sig = job.recipe.signature
    sigs = {p.id: p for p in sig.procedures} if sig is not None else {}
    names = {p.id: p for p in fixed}
    skeleton = []
    for j in range(job.b + 1):
        src = names.get(j) or sigs.get(j)
        skeleton.append(Procedure(j, src.name, src.params) if src is not None
                        else Procedure(j, "main" if j == 0 else f"p{j}"))
    # injected procedures keep their own length; the others get the bound n
    lines = tuple(max(len(names[j].lines) - 1, 1) if j in names else job.n for j in range(job.b + 1))
    cfg = CompilationConfig(n=max(lines), b=job.b, m=job.m, split=job.split, condition_pool=pool,
                            action_pool=job.action_pool, proc_lines=lines)
    ct = compile_nested(job.problem, tuple(skeleton), cfg)
    return inject_dck(ct, fixed) if fixed else ct


@dataclass
class ProcRow:
    name: str
    lines: int
    instances: int
    seconds: float
    plan_length: int
    kind: str
    expansions: int = 0


@dataclass
class BenchReport:
    domain: str
    params: dict
    rows: list[ProcRow] = field(default_factory=list)
    solved: bool = False
    heldout_ok: bool | None = None
    program: str = ""
    message: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def table(self) -> str:
        out = [f"{'procedure':<10} {'kind':<4} {'lines':>5} {'inst':>5} {'time(s)':>9} {'plan':>6}"]
        for r in self.rows:
            out.append(f"{r.name:<10} {r.kind:<4} {r.lines:>5} {r.instances:>5} {r.seconds:>9.2f} {r.plan_length:>6}")
        return "\n".join(out)


def program_lines(proc: Procedure) -> int:
    """Programmed lines, not counting the closing end."""
    return max(len(proc.lines) - 1, 0)


def solution_kind(program: PlanningProgram) -> str:
    calls = [(p.id, w.proc) for p in program.procedures for w in p.lines if isinstance(w, Call)]
    if any(a == c for a, c in calls) or _cyclic(calls):
        return "RP" if any(p.params for p in program.procedures) else "R"
    return "NP" if calls else "OP"


def _cyclic(edges) -> bool:
    graph: dict = {}
    for a, c in edges:
        graph.setdefault(a, set()).add(c)

    def reach(start):
        seen, todo = set(), list(graph.get(start, ()))
        while todo:
            x = todo.pop()
            if x == start:
                return True
            if x not in seen:
                seen.add(x)
                todo += graph.get(x, ())
        return False
    return any(reach(a) for a in graph)


@dataclass
class SynthResult:
    program: PlanningProgram
    seconds: float
    plan_length: int
    expansions: int


def synthesize(job: Job, ct: CompiledTask | None = None) -> SynthResult:
    """Compile, plan, decode and verify on the training instances."""
    ct = ct or compile_job(job)
    stats = SearchStats()
    start = time.perf_counter()
    if job.planner is not None:
        plan = solve_external(ct.task, job.planner)
    else:
        plan = solve(ct.task, job.algorithm, job.limits, stats)
    seconds = time.perf_counter() - start
    program = decode(plan, ct)
    report = solves(program, job.problem, ExecLimits(max_depth=max(job.m, 1)))
    if not report.ok:
        raise VerificationFailed("decoded program fails a training instance", report.failures())
    return SynthResult(program, seconds, len(plan.steps), stats.expansions)


def verify_heldout(job: Job, program: PlanningProgram):
    if job.heldout is None:
        return None
    return solves(program, job.heldout, ExecLimits(max_depth=max(job.m, 1)))


def cmd_synth(job: Job) -> tuple[BenchReport, PlanningProgram | None]:
    rep = BenchReport(job.recipe.name, dict(job.recipe.params))
    try:
        res = synthesize(job)
    except (Unsolvable, LimitHit) as exc:
        rep.rows.append(ProcRow("main", job.n, len(job.problem.instances), 0.0, 0, "ME"))
        rep.message = f"no program: {exc}"
        return rep, None
    # one row per synthesized procedure; the planning figures belong to the single search
    fixed = {p.id for p in fixed_procedures(job)}
    kind = solution_kind(res.program)
    for proc in res.program.procedures:
        if proc.id not in fixed:
            rep.rows.append(ProcRow(proc.name, program_lines(proc), len(job.problem.instances), res.seconds,
                                    res.plan_length, kind, res.expansions))
    rep.program = format_program(res.program)
    rep.solved = True
    held = verify_heldout(job, res.program)
    if held is not None:
        rep.heldout_ok = held.ok
        if not held.ok:
            rep.message = f"held-out failures: {', '.join(r.name for r in held.failures()[:5])}"
    return rep, res.program


# ---------------------------------------------------------------------------
# divide-and-conquer pipeline

def _subtask_job(job: Job, index: int) -> Job:
    sub = job.recipe.suite.subtasks[index]
    return replace(job, problem=sub.problem, heldout=None, n=sub.lines, b=0, m=1, dck=(),
                   condition_pool=sub.condition_pool if sub.condition_pool is not None else sub.problem.condition_pool,
                   action_pool=sub.action_pool)


def _run_subtask(args):
    name, params, index, split, algorithm, limits = args
    recipe = make_recipe(name, params)
    base = Job(recipe, recipe.problem, None, recipe.lines, split=split, algorithm=algorithm, limits=limits)
    return synthesize(_subtask_job(base, index))


def cmd_pipeline(job: Job, jobs: int = 1) -> tuple[BenchReport, PlanningProgram | None]:
    suite = job.recipe.suite
    if suite is None or (not suite.subtasks and suite.dck is None):
        return cmd_synth(job)
    rep = BenchReport(job.recipe.name, dict(job.recipe.params))
    subs = suite.subtasks
    results: list[SynthResult] = []
    if subs:
        if jobs > 1 and job.planner is None:
            work = [(job.recipe.name, job.recipe.params, k, job.split, job.algorithm, job.limits)
                    for k in range(len(subs))]
            with ProcessPoolExecutor(max_workers=min(jobs, len(subs))) as pool:
                futures = [pool.submit(_run_subtask, w) for w in work]
                for k, fut in enumerate(futures):
                    try:
                        results.append(fut.result())
                    except (Unsolvable, LimitHit) as exc:
                        return _sub_failed(rep, subs[k], exc), None
        else:
            for k, sub in enumerate(subs):
                try:
                    results.append(synthesize(_subtask_job(job, k)))
                except (Unsolvable, LimitHit) as exc:
                    return _sub_failed(rep, sub, exc), None
    procs: list[Procedure] = []
    for k, (sub, res) in enumerate(zip(subs, results)):
        lines = res.program.main.lines
        procs.append(Procedure(k + 1, sub.name, sub.params, lines))
        rep.rows.append(ProcRow(sub.name, program_lines(res.program.main), len(sub.problem.instances),
                                res.seconds, res.plan_length, solution_kind(res.program), res.expansions))
    if suite.dck is not None:
        for p in suite.dck.procedures[1:]:
            procs.append(Procedure(len(procs) + 1, p.name, p.params, p.lines))
    # rename calls inside injected DCK procedures to the new slot ids
    procs = _renumber(procs, suite.dck)
    skeleton = (Procedure(0, "main"),) + tuple(Procedure(p.id, p.name, p.params) for p in procs)
    lines = (suite.main_lines,) + tuple(max(len(p.lines) - 1, 1) for p in procs)
    pools = (suite.main_conditions,) + tuple(
        (s.condition_pool if s.condition_pool is not None else s.problem.condition_pool) for s in subs
    ) + tuple(None for _ in procs[len(subs):])
    actions = (suite.main_actions,) + tuple(s.action_pool for s in subs) + tuple(None for _ in procs[len(subs):])
    cfg = CompilationConfig(n=max(lines), b=len(procs), m=max(suite.stack, 2), split=job.split,
                            one_level_only=suite.one_level_only, call_main=suite.call_main,
                            proc_lines=lines, proc_actions=actions, proc_conditions=pools)
    main_job = replace(job, problem=suite.overall, n=max(lines), b=len(procs), m=max(suite.stack, 2))
    try:
        ct = inject_dck(compile_nested(suite.overall, skeleton, cfg), procs)
        res = synthesize(main_job, ct)
    except (Unsolvable, LimitHit) as exc:
        rep.rows.append(ProcRow("main", suite.main_lines, len(suite.overall.instances), 0.0, 0, "ME"))
        rep.message = f"main: no program: {exc}"
        return rep, None
    rep.rows.insert(0, ProcRow("main", program_lines(res.program.main), len(suite.overall.instances),
                               res.seconds, res.plan_length, solution_kind(res.program), res.expansions))
    rep.program = format_program(res.program)
    rep.solved = True
    held = verify_heldout(main_job, res.program)
    if held is not None:
        rep.heldout_ok = held.ok
        if not held.ok:
            rep.message = f"held-out failures: {', '.join(r.name for r in held.failures()[:5])}"
    return rep, res.program


def _renumber(procs, dck):
    if dck is None:
        return procs
    ids = {p.name: p.id for p in procs}
    ids["main"] = 0
    out = []
    for p in procs:
        lines = tuple(Call(ids[dck.procedures[w.proc].name], w.args) if isinstance(w, Call) else w
                      for w in p.lines) if any(isinstance(w, Call) for w in p.lines) else p.lines
        out.append(Procedure(p.id, p.name, p.params, lines))
    return out


def _sub_failed(rep, sub, exc):
    rep.rows.append(ProcRow(sub.name, sub.lines, len(sub.problem.instances), 0.0, 0, "ME"))
    rep.message = f"subtask {sub.name}: no program: {exc}"
    return rep


# ---------------------------------------------------------------------------
# commands

def _write(out: str, name: str, text: str):
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, name), "w") as fh:
        fh.write(text)


def decode_json(ct: CompiledTask) -> str:
    prog = PlanningProgram(tuple(ct.skeleton))
    entries = {}
    for a in ct.task.actions:
        e = ct.decode_table[a.name]
        entries[a.name] = dict(mode=e.mode, op=e.op, line=e.line, proc=e.proc, level=e.level,
                               instruction=None if e.instruction is None else prog.instruction_text(e.instruction),
                               instance=e.instance)
    cfg = ct.config
    doc = dict(config=dict(n=cfg.n, b=cfg.b, m=cfg.m, split=cfg.split, flat=cfg.flat),
               procedures=[dict(id=p.id, name=p.name, params=[f"{q.var}:{q.domain}" for q in p.params])
                           for p in ct.skeleton],
               actions=entries)
    return json.dumps(doc, indent=1) + "\n"


def do_compile(args) -> int:
    job = build_job(args)
    ct = compile_job(job)
    pair = emit(ct.task, domain_name=f"{job.recipe.name}-compiled", problem_name=f"{job.recipe.name}-task")
    _write(args.out, "domain.pddl", pair.domain_text)
    _write(args.out, "problem.pddl", pair.problem_text)
    _write(args.out, "decode.json", decode_json(ct))
    print(f"wrote {args.out}/domain.pddl ({len(ct.task.fluents)} fluents, {len(ct.task.actions)} actions)")
    return EXIT_OK


def _finish(args, rep: BenchReport, program) -> int:
    print(rep.table())
    if program is not None:
        print(rep.program, end="")
    if rep.message:
        print(rep.message)
    if args.out:
        _write(args.out, "report.json", rep.to_json() + "\n")
        if program is not None:
            _write(args.out, "program.txt", rep.program)
    if program is None:
        return EXIT_LIMIT
    if rep.heldout_ok is False:
        return EXIT_VERIFY
    return EXIT_OK


def do_synth(args) -> int:
    job = build_job(args)
    rep, program = cmd_synth(job)
    return _finish(args, rep, program)


def do_pipeline(args) -> int:
    job = build_job(args)
    rep, program = cmd_pipeline(job, args.jobs)
    return _finish(args, rep, program)


def _load_program_file(path):
    try:
        with open(path) as fh:
            return parse_program(fh.read())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except ProgramError as exc:
        line = getattr(exc, "line", None)
        raise ConfigError(f"{path}:{line or 1}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _check(args, strict: bool) -> int:
    job = build_job(args)
    program = _load_program_file(args.program)
    gp = job.heldout if args.heldout and job.heldout is not None else job.problem
    limits = ExecLimits(max_depth=args.max_depth or max(job.m, 1), max_steps=args.max_steps)
    bad = 0
    for t, inst in enumerate(gp.instances):
        try:
            out = run(program, gp, inst, limits, trace=args.trace)
        except ProgramError as exc:
            raise ConfigError(f"{args.program}: {exc}") from None
        ok = out.ok and inst.goal.holds(out.state)
        bad += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {inst.name or t}: {type(out).__name__}")
        if args.trace and getattr(out, "trace", None):
            for c in out.trace:
                where = " ".join(f"{program.procedures[f.proc].name}:{f.pc}" for f in c.stack)
                print(f"    [{where}] {' '.join(gp.domain.describe(c.state))}")
    print(f"{len(gp.instances) - bad}/{len(gp.instances)} instances solved")
    return EXIT_VERIFY if (bad and strict) else EXIT_OK


def do_run(args) -> int:
    return _check(args, strict=False)


def do_verify(args) -> int:
    return _check(args, strict=True)


def do_enumerate(args) -> int:
    job = build_job(args)
    gp = job.problem
    actions = job.action_pool
    conds = job.condition_pool if job.condition_pool is not None else job.recipe.condition_pool
    found = []
    try:
        for prog in enumerate_programs(gp, job.n, actions, conds, job.limits):
            found.append(prog)
            if not args.cross_check and len(found) >= args.count:
                break
    except LimitHit as exc:
        print(f"limit reached: {exc}")
        return EXIT_LIMIT
    for prog in found[:args.count]:
        print(format_program(prog), end="")
        print("--")
    print(f"{len(found)} solving program(s) with at most {job.n} lines")
    if not args.cross_check:
        return EXIT_OK
    ct = compile_flat(gp, job.n, condition_pool=conds, split=job.split, action_pool=actions)
    try:
        plan = solve(ct.task, "bfs", job.limits)
    except Unsolvable:
        plan = None
    except LimitHit as exc:
        print(f"limit reached: {exc}")
        return EXIT_LIMIT
    if (plan is None) != (not found):
        print(f"cross-check FAILED: enumerator found {len(found)}, compiled task "
              f"{'unsolvable' if plan is None else 'solvable'}")
        return EXIT_VERIFY
    if plan is not None:
        decoded = decode(plan, ct)
        if not any(agrees(decoded, c) for c in found):
            print("cross-check FAILED: decoded program is not among the enumerated solutions")
            print(format_program(decoded), end="")
            return EXIT_VERIFY
    print("cross-check ok")
    return EXIT_OK


def do_self_solve(args) -> int:
    try:
        with open(args.domain_file) as fh:
            dtext = fh.read()
        with open(args.problem_file) as fh:
            ptext = fh.read()
        problem = parse(dtext, ptext)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    limits = SearchLimits(max_expansions=args.max_expansions or 10**7, max_seconds=args.max_seconds or 3600)
    try:
        plan = solve(problem, args.algorithm, limits)
    except (Unsolvable, LimitHit) as exc:
        print(f"no plan: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    with open(args.plan_file, "w") as fh:
        fh.write(format_plan(plan))
    print(f"plan with {len(plan.steps)} steps written to {args.plan_file}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _job_args(p, synth=True):
    p.add_argument("--manifest", help="JSON manifest")
    p.add_argument("--domain", help="recipe name, e.g. sorting")
    p.add_argument("--params", help="recipe parameters, e.g. n=4,seed=1")
    p.add_argument("--lines", type=int, help="line bound n")
    p.add_argument("--procs", type=int, help="number of auxiliary procedures b")
    p.add_argument("--stack", type=int, help="stack bound m")
    p.add_argument("--split", dest="split", action="store_true", default=None)
    p.add_argument("--no-split", dest="split", action="store_false")
    p.add_argument("--dck", nargs="+", metavar="FILE", help="program files with procedures to inject")
    p.add_argument("--algorithm", choices=("gbfs", "bfs"))
    p.add_argument("--max-seconds", type=float)
    p.add_argument("--max-expansions", type=int)
    if synth:
        p.add_argument("--planner-cmd", help="external planner: template with {domain} {problem} {plan}")
        p.add_argument("--no-holdout", action="store_true", help="skip held-out verification")
        p.add_argument("--out", help="directory for report.json and program.txt")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="genplan", description="Planning-program synthesis via classical planning")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="write the compiled task as PDDL plus a decode table")
    _job_args(p, synth=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=do_compile)

    p = sub.add_parser("synth", help="synthesize and verify a program")
    _job_args(p)
    p.set_defaults(func=do_synth)

    p = sub.add_parser("pipeline", help="synthesize subtask procedures, then main")
    _job_args(p)
    p.add_argument("--jobs", type=int, default=1, help="concurrent subtask syntheses")
    p.set_defaults(func=do_pipeline)

    for name, func in (("run", do_run), ("verify", do_verify)):
        p = sub.add_parser(name, help=f"{name} a program file on a recipe's instances")
        p.add_argument("program")
        _job_args(p, synth=False)
        p.add_argument("--heldout", action="store_true", help="use the held-out instances")
        p.add_argument("--trace", action="store_true")
        p.add_argument("--max-depth", type=int, help="stack bound during execution")
        p.add_argument("--max-steps", type=int, default=10**6)
        p.add_argument("--no-holdout", action="store_true", help=argparse.SUPPRESS)
        p.set_defaults(func=func)

    p = sub.add_parser("enumerate", help="brute-force the solving flat programs")
    _job_args(p, synth=False)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--cross-check", action="store_true",
                   help="compare with BFS on the compiled task")
    p.set_defaults(func=do_enumerate)

    p = sub.add_parser("self-solve", help="internal planner with the external-planner file contract")
    p.add_argument("domain_file")
    p.add_argument("problem_file")
    p.add_argument("plan_file")
    p.add_argument("--algorithm", choices=("gbfs", "bfs"), default="gbfs")
    p.add_argument("--max-seconds", type=float)
    p.add_argument("--max-expansions", type=int)
    p.set_defaults(func=do_self_solve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BadConfig, BadParams, TooLong, UnknownInstruction, NameCollision) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        for r in exc.failures[:5]:
            print(f"  {r.name}: {type(r.outcome).__name__}", file=sys.stderr)
        return EXIT_VERIFY
    except Inconsistent as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except AdapterError as exc:
        print(f"external planner: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
