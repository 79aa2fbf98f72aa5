"""Propositional encoding of bounded integer variables.

An integer variable ``v`` with range lo..hi becomes fluents ``v=a``, exactly
one of which holds. Tracked comparisons between two variables are kept as
fluents ``eq(v,w)`` / ``lt(v,w)`` that every action writing ``v`` or ``w``
updates through conditional effects, so they always agree with the values.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from ..model import (
    Action,
    Condition,
    ConditionalEffect,
    Domain,
    Literal,
    LiteralSet,
    Variable,
    VariableDomain,
)

_RELATIONS = {"=": lambda a, b: a == b, "<": lambda a, b: a < b}


@dataclass
class IntVarSpec:
    name: str
    hi: int
    lo: int = 0
    # (other variable name or int constant, relation)
    comparisons: set = field(default_factory=set)

    def __post_init__(self):
        if self.hi - self.lo < 1:
            raise ValueError(f"{self.name}: range must hold at least two values")

    @property
    def values(self) -> range:
        return range(self.lo, self.hi + 1)

    def fluent_name(self, a: int) -> str:
        return f"{self.name}={a}"


def comparison_name(v: str, w, rel: str) -> str:
    if isinstance(w, int) and rel == "=":
        return f"{v}={w}"
    return f"{'eq' if rel == '=' else 'lt'}({v},{w})"


class DomainBuilder:
    def __init__(self, name: str):
        self.name = name
        self.fluents: list[str] = []
        self._idx: dict[str, int] = {}
        self.actions: list[Action] = []
        self.conditions: list[Condition] = []
        self.variables: list[Variable] = []
        self.ints: dict[str, IntVarSpec] = {}
        # fluent name -> (v, w, rel); w may be a constant
        self.comparisons: dict[str, tuple] = {}

    # fluents ---------------------------------------------------------------
    def fluent(self, name: str) -> int:
        if name not in self._idx:
            self._idx[name] = len(self.fluents)
            self.fluents.append(name)
        return self._idx[name]

    def lit(self, name: str) -> Literal:
        if name.startswith("!"):
            return Literal(self.fluent(name[1:]), False)
        return Literal(self.fluent(name), True)

    def lits(self, names: Iterable[str]) -> LiteralSet:
        return LiteralSet.of(self.lit(n) for n in names)

    # integer variables -----------------------------------------------------
    def int_var(self, name: str, hi: int, lo: int = 0) -> IntVarSpec:
        spec = IntVarSpec(name, hi, lo)
        self.ints[name] = spec
        for a in spec.values:
            self.fluent(spec.fluent_name(a))
        return spec

    def track(self, v: str, w, rel: str = "=") -> str:
        """Track relation ``v rel w`` as a fluent and return its name."""
        name = comparison_name(v, w, rel)
        if isinstance(w, int) and rel == "=":
            return name  # plain value fluent
        self.ints[v].comparisons.add((w, rel))
        self.comparisons[name] = (v, w, rel)
        self.fluent(name)
        return name

    def _comparisons_of(self, var: str) -> list[str]:
        return [n for n, (v, w, _) in self.comparisons.items() if v == var or w == var]

    def _eval_comparison(self, name: str, values: Mapping[str, int]) -> bool:
        v, w, rel = self.comparisons[name]
        b = w if isinstance(w, int) else values[w]
        return _RELATIONS[rel](values[v], b)

    def action(self, name: str, pre: Iterable[str] = (), effects=()) -> Action:
        """Add an action; ``effects`` is a list of (condition names, effect names)."""
        cond = tuple(ConditionalEffect(self.lits(c), self.lits(e)) for c, e in effects)
        a = Action(name, self.lits(pre), cond)
        self.actions.append(a)
        return a

    def register_action(self, name: str, reads: list[str], writes: list[str],
                        update: Callable[[dict], dict], pre: Iterable[str] = ()) -> Action:
        """Add an action whose effect is a function of integer variable values.

        ``update`` maps the values of ``reads`` to new values for (a subset of)
        ``writes``. Results are clamped to the variable ranges, which makes
        out-of-range updates saturate.
        """
        if not set(writes) <= set(reads):
            raise ValueError(f"{name}: written variables must also be read")
        effects: list[ConditionalEffect] = []
        specs = [self.ints[r] for r in reads]

        def new_values(vals):
            out = dict(vals)
            for k, x in (update(dict(vals)) or {}).items():
                if k not in writes:
                    raise ValueError(f"{name}: update wrote undeclared variable {k}")
                spec = self.ints[k]
                out[k] = min(max(x, spec.lo), spec.hi)
            return out

        for combo in itertools.product(*(s.values for s in specs)):
            vals = dict(zip(reads, combo))
            new = new_values(vals)
            eff = []
            for k in writes:
                if new[k] != vals[k]:
                    eff += [f"!{self.ints[k].fluent_name(vals[k])}", self.ints[k].fluent_name(new[k])]
            if eff:
                cond = [self.ints[r].fluent_name(vals[r]) for r in reads]
                effects.append(ConditionalEffect(self.lits(cond), self.lits(eff)))

        touched = sorted({c for k in writes for c in self._comparisons_of(k)})
        for comp in touched:
            v, w, _ = self.comparisons[comp]
            extra = [x for x in (v, w) if isinstance(x, str) and x not in reads]
            scope = reads + extra
            for combo in itertools.product(*(self.ints[s].values for s in scope)):
                vals = dict(zip(scope, combo))
                new = new_values({r: vals[r] for r in reads})
                after = dict(vals, **new)
                old_t, new_t = self._eval_comparison(comp, vals), self._eval_comparison(comp, after)
                if old_t != new_t:
                    cond = [self.ints[s].fluent_name(vals[s]) for s in scope]
                    effects.append(ConditionalEffect(
                        self.lits(cond), self.lits([comp if new_t else "!" + comp])))
        a = Action(name, self.lits(pre), tuple(effects))
        self.actions.append(a)
        return a

    def int_var_actions(self, var: str) -> list[Action]:
        """inc(v) and dec(v), saturating at the range bounds."""
        return [
            self.register_action(f"inc({var})", [var], [var], lambda d: {var: d[var] + 1}),
            self.register_action(f"dec({var})", [var], [var], lambda d: {var: d[var] - 1}),
        ]

    def assign_action(self, v: str, w: str) -> Action:
        return self.register_action(f"assign({v},{w})", [w, v], [v], lambda d: {v: d[w]})

    def add_action(self, v: str, w: str) -> Action:
        return self.register_action(f"add({v},{w})", [v, w], [v], lambda d: {v: d[v] + d[w]})

    # program variables and conditions -------------------------------------
    def variable(self, name: str, domain: VariableDomain, fluent_names=None) -> Variable:
        if fluent_names is None:
            fluent_names = [f"{name}={x}" for x in domain.values]
        var = Variable(name, domain, tuple(self.fluent(f) for f in fluent_names))
        self.variables.append(var)
        return var

    def indirect_condition(self, name: str, cases) -> Condition:
        """``cases``: list of (selector fluent names, target fluent name or None)."""
        cond = Condition(name, None, tuple(
            (self.lits(sel), None if tgt is None else self.fluent(tgt)) for sel, tgt in cases))
        self.conditions.append(cond)
        return cond

    # states ----------------------------------------------------------------
    def state(self, values: Mapping[str, int], true_fluents: Iterable[str] = ()) -> int:
        s = 0
        for v, x in values.items():
            spec = self.ints[v]
            if not spec.lo <= x <= spec.hi:
                raise ValueError(f"{v}={x} outside {spec.lo}..{spec.hi}")
            s |= 1 << self._idx[spec.fluent_name(x)]
        for comp in self.comparisons:
            v, w, _ = self.comparisons[comp]
            if v in values and (isinstance(w, int) or w in values):
                if self._eval_comparison(comp, values):
                    s |= 1 << self._idx[comp]
        for f in true_fluents:
            s |= 1 << self._idx[f]
        return s

    def build(self) -> Domain:
        return Domain(self.name, tuple(self.fluents), tuple(self.actions),
                      tuple(self.conditions), tuple(self.variables))


def int_var_actions(spec: IntVarSpec, builder: DomainBuilder | None = None) -> list[Action]:
    """inc/dec actions for ``spec``, kept consistent with its tracked comparisons.

    Without a builder, a throwaway one holding only ``spec`` (and constant
    comparisons) is used.
    """
    if builder is None:
        builder = DomainBuilder(spec.name)
        builder.int_var(spec.name, spec.hi, spec.lo)
        for w, rel in spec.comparisons:
            if isinstance(w, int):
                builder.track(spec.name, w, rel)
    return builder.int_var_actions(spec.name)
