"""Benchmark generalized-planning problems, addressable by name."""
from __future__ import annotations

from .base import BadParams, DomainRecipe, Subtask, SubtaskSuite
from .encoding import DomainBuilder, IntVarSpec, comparison_name, int_var_actions
from .grid import make_grid_nav, make_grid_to_origin, make_hall_a, make_visit_all
from .lists import make_list_visit, make_reverse, make_sorting
from .numeric import make_fibonacci, make_summatory
from .tree import make_tree_dfs

RECIPES = {
    "grid_to_origin": make_grid_to_origin,
    "grid_nav": make_grid_nav,
    "hall_a": make_hall_a,
    "visit_all": make_visit_all,
    "summatory": make_summatory,
    "fibonacci": make_fibonacci,
    "reverse": make_reverse,
    "sorting": make_sorting,
    "list_visit": make_list_visit,
    "tree_dfs": make_tree_dfs,
}


def parse_params(text: str | None) -> dict:
    """``"n=4,seed=2"`` -> {"n": "4", "seed": "2"}."""
    out = {}
    for chunk in (text or "").split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise BadParams(f"expected key=value, got {chunk!r}")
        k, v = chunk.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def make_recipe(name: str, params: dict | str | None = None) -> DomainRecipe:
    if name not in RECIPES:
        raise BadParams(f"unknown domain {name!r}; choose from {', '.join(sorted(RECIPES))}")
    if not isinstance(params, dict):
        params = parse_params(params)
    return RECIPES[name](dict(params))


__all__ = [
    "BadParams", "DomainBuilder", "DomainRecipe", "IntVarSpec", "RECIPES", "Subtask", "SubtaskSuite",
    "comparison_name", "int_var_actions", "make_recipe", "parse_params",
]
