import os

from hypothesis import settings

from genplan.domains.encoding import DomainBuilder
from genplan.model import GeneralizedProblem, Instance

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance results collected for the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


def micro_domain():
    """Three fluents a, b, c; toggles and a conditional shift."""
    b = DomainBuilder("micro")
    for f in "abc":
        b.fluent(f)
    b.action("set-a", (), [((), ["a"])])
    b.action("clear-a", (), [((), ["!a"])])
    b.action("shift", (), [(["a"], ["b", "!a"]), (["b"], ["c", "!b"])])
    b.action("reset", (), [((), ["!a", "!b", "!c"])])
    return b.build()


def micro_problem(goal=("c",), inits=((), ("a",), ("b",))):
    d = micro_domain()
    insts = tuple(Instance(d.state(s), d.lits(*goal), "+".join(s) or "empty") for s in inits)
    return GeneralizedProblem(d, insts, ("a", "b", "c"), "micro")
