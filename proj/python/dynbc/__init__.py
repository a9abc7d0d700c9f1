"""Python bindings for the dynbc library.

Problem specs may be passed as dicts, JSON strings or paths to JSON files.
"""

import json
import os

from . import _dynbc
from ._dynbc import (  # noqa: F401
    CertificateMismatch,
    ConditionViolated,
    ConfigError,
    DivergentIntegral,
    DomainError,
    DynbcError,
    Expr,
    InputError,
    PreconditionFailed,
    SyntaxError,
    build_barrier,
    find_q1,
    parse,
    sup_bound,
)

__all__ = [
    "Expr",
    "parse",
    "find_q1",
    "build_barrier",
    "sup_bound",
    "check_compatibility",
    "check_hypotheses",
    "solve",
    "run_cli",
    "DynbcError",
    "SyntaxError",
    "DomainError",
    "ConditionViolated",
    "PreconditionFailed",
    "ConfigError",
    "CertificateMismatch",
    "DivergentIntegral",
    "InputError",
]


def _spec_text(spec):
    if isinstance(spec, dict):
        return json.dumps(spec)
    if isinstance(spec, os.PathLike) or (isinstance(spec, str) and not spec.lstrip().startswith("{")):
        with open(spec, encoding="utf-8") as fh:
            return fh.read()
    return spec


def check_compatibility(spec):
    """Return the (minus, plus) compatibility residuals at t = 0."""
    return _dynbc.check_compatibility(_spec_text(spec))


def check_hypotheses(spec, M, q0, psi, pmax=0.0):
    """Return the condition report as a list of dicts."""
    return _dynbc.check_hypotheses(_spec_text(spec), M, q0, psi, pmax)


def solve(spec, nx=None, cutoff=None):
    """Solve the problem; returns status, grids and the solution rows."""
    return _dynbc.solve(_spec_text(spec), nx, cutoff)


def run_cli(*args):
    """Run a CLI subcommand in-process and return its exit code."""
    return _dynbc.run_cli([str(a) for a in args])
