"""Benchmark function suites with seeded instance generation."""

from .core import (
    EvalCounter,
    FunctionInstance,
    ProblemId,
    Suite,
    SuiteError,
    bbob_class,
    evaluate,
    list_functions,
    make_instance,
    problem,
)
from .bbob import random_orthogonal

__all__ = [
    "EvalCounter",
    "FunctionInstance",
    "ProblemId",
    "Suite",
    "SuiteError",
    "bbob_class",
    "evaluate",
    "list_functions",
    "make_instance",
    "problem",
    "random_orthogonal",
]
