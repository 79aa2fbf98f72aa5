"""Synthesis of planning programs with procedures via classical planning."""
from .model import ClassicalProblem, Domain, GeneralizedProblem, Instance
from .program import PlanningProgram, Procedure, format_program, parse_program, solves

__version__ = "0.1.0"

__all__ = [
    "ClassicalProblem", "Domain", "GeneralizedProblem", "Instance", "PlanningProgram", "Procedure",
    "format_program", "parse_program", "solves",
]
