import pytest

from genplan.compile import (
    BadConfig,
    CompilationConfig,
    Inconsistent,
    TooLong,
    UnknownInstruction,
    compile_flat,
    compile_nested,
    decode,
    default_skeleton,
    eval_jmp_actions,
    eval_jmp_fluents,
    inject_dck,
)
from genplan.domains import make_recipe
from genplan.domains.encoding import DomainBuilder
from genplan.domains.grid import FIG2, grid_to_origin_problem
from genplan.model import Condition, GeneralizedProblem, Instance, apply
from genplan.planner import bfs_solve, solve
from genplan.program import Act, End, Goto, Procedure, parse_program, solves

from conftest import micro_problem


def pool_problem(k: int) -> GeneralizedProblem:
    b = DomainBuilder("pool")
    for f in range(k):
        b.fluent(f"f{f}")
    b.action("noop", (), [])
    d = b.build()
    return GeneralizedProblem(d, (Instance(0, d.lits("f0")),), tuple(f"f{f}" for f in range(k)))


@pytest.mark.parametrize("n", [2, 5])
@pytest.mark.parametrize("k", [2, 8])
def test_goto_machinery_counts(n, k):
    gp = pool_problem(k)
    plain = compile_flat(gp, n, split=False)
    assert len(plain.actions_of("R", "goto")) == k * n * n
    split = compile_flat(gp, n, split=True)
    assert len(split.actions_of("R", "eval")) + len(split.actions_of("R", "jmp")) == (k + n) * n
    assert not split.actions_of("R", "goto")


def test_flat_and_nested_names():
    gp = micro_problem()
    flat = compile_flat(gp, 2)
    assert "pc_l2" in flat.task.fluents and "done" in flat.task.fluents
    nested = compile_nested(gp, None, CompilationConfig(n=2, b=1, m=2))
    names = set(nested.task.fluents)
    assert {"pc_l2_k1", "pc_l0_k2", "proc_j1_k2", "top_k1", "ins_l0_j1_nil"} <= names
    assert any(a.startswith("p_call_p1_l0_j0_k1") for a in nested.decode_table)


def test_fluent_space_is_a_bijection():
    r = make_recipe("hall_a", "size=3")
    ct = compile_nested(r.problem, (Procedure(0, "main"),) + tuple(
        Procedure(p.id, p.name, p.params) for p in r.reference.procedures[1:]),
        CompilationConfig(n=5, b=2, m=2, condition_pool=("aux=0", "aux=n")))
    space = ct.space
    assert len(set(space.names)) == len(space.names)
    for i, name in enumerate(space.names):
        key = space.parse(name)
        assert space.render(key) == name and space[key] == i


def test_b0_has_no_calls_or_deep_ends():
    gp = micro_problem()
    ct = compile_nested(gp, None, CompilationConfig(n=3, b=0, m=1))
    assert not ct.actions_of(op="call")
    assert all(ct.decode_table[a].level == 1 for a in ct.actions_of(op="end"))


def test_bad_configs():
    with pytest.raises(BadConfig):
        CompilationConfig(n=0)
    with pytest.raises(BadConfig):
        CompilationConfig(n=2, b=1, m=1)
    with pytest.raises(BadConfig):
        CompilationConfig(n=2, m=3, one_level_only=True)


def test_nested_b0_m1_bisimilar_to_flat():
    gp = grid_to_origin_problem(3, 3, [(2, 1), (1, 2)])
    flat = compile_flat(gp, 4)
    nested = compile_nested(gp, None, CompilationConfig(n=4, b=0, m=1, call_main=False))
    assert len(flat.task.actions) == len(nested.task.actions)
    p1, p2 = bfs_solve(flat.task), bfs_solve(nested.task)
    assert len(p1) == len(p2)
    assert solves(decode(p1, flat), gp).ok and solves(decode(p2, nested), gp).ok
    # the flat plan, renamed to levelled actions, is a plan for the nested task
    rename = {}
    for name, e in nested.decode_table.items():
        rename[(e.mode, e.op, e.line, str(e.instruction), e.instance)] = name
    steps = []
    for name in p1.steps:
        e = flat.decode_table[name]
        steps.append(rename[(e.mode, e.op, e.line, str(e.instruction), e.instance)])
    s = nested.task.initial
    for name in steps:
        s = apply(s, nested.task.domain.action(name))
    assert nested.task.goal.holds(s)


def test_decoded_plans_are_sound_on_micro():
    gp = micro_problem(inits=((), ("a",)))
    for n in (3, 4):
        for split in (True, False):
            ct = compile_flat(gp, n, split=split)
            prog = decode(solve(ct.task, "bfs"), ct)
            assert solves(prog, gp).ok


def test_full_dck_needs_only_repeats():
    gp = grid_to_origin_problem(3, 3, [(2, 1), (1, 2), (0, 0)])
    ct = inject_dck(compile_flat(gp, 4), parse_program(FIG2).procedures)
    plan = bfs_solve(ct.task)
    assert all(ct.decode_table[a].mode == "R" for a in plan.steps)
    assert decode(plan, ct) == parse_program(FIG2, 4)


def test_dck_monotonicity():
    # injecting longer prefixes of a correct program keeps the task solvable,
    # and every decoded program extends the injected prefix
    gp = grid_to_origin_problem(3, 3, [(2, 1), (1, 2)])
    ref = parse_program(FIG2).main
    for cut in range(0, 5):
        part = Procedure(0, "main", (), ref.lines[:cut])
        ct = inject_dck(compile_flat(gp, 4), [part])
        prog = decode(bfs_solve(ct.task), ct)
        assert prog.main.lines[:cut] == ref.lines[:cut]
        assert solves(prog, gp).ok


def test_inject_errors():
    gp = grid_to_origin_problem(3, 3, [(2, 1)])
    ct = compile_flat(gp, 2)
    with pytest.raises(TooLong):
        inject_dck(ct, parse_program(FIG2).procedures)
    with pytest.raises(UnknownInstruction):
        inject_dck(ct, [Procedure(0, "main", (), (Act("teleport"), End()))])
    once = inject_dck(ct, [Procedure(0, "main", (), (Act("dec(x)"),))])
    with pytest.raises(UnknownInstruction):
        inject_dck(once, [Procedure(0, "main", (), (Act("dec(y)"),))])


def test_decode_rejects_foreign_actions():
    ct = compile_flat(micro_problem(), 2)
    with pytest.raises(Inconsistent):
        decode(["not-an-action"], ct)


def test_eval_jmp_semantics():
    conds = [Condition("f", fluent=0)]
    names = eval_jmp_fluents(conds, 3)
    acts = {a.name: a for a in eval_jmp_actions(0, conds, 3)}
    idx = {f: i for i, f in enumerate(names)}

    def st(*fs):
        return sum(1 << idx[f] for f in fs)

    ev = next(a for k, a in acts.items() if "eval" in k)
    jmp = acts["jmp_t2_l0"]
    # condition true: fall through to the next line
    s = apply(apply(st("pc_l0", "f"), ev), jmp)
    assert s == st("pc_l1", "f")
    # condition false: jump
    s = apply(apply(st("pc_l0"), ev), jmp)
    assert s == st("pc_l2")
