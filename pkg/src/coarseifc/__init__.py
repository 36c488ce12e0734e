"""Executable semantics for a coarse-grained IFC language embedding a mini target language.

The pieces: label lattices, the target calculus, the IFC layer with tasks and
message queues, schedulers, erasure, bounded non-interference checks, and a
single-heap engine with its isomorphism back to per-task stores.
"""
import sys

from .concrete import (ConcreteConfiguration, ConcreteSemantics, CTask, check_functorial, iso_f,
                       iso_f_inv, wf)
from .config import Configuration, Task, make_config
from .erasure import erase_config, erase_term, l_equiv
from .extensions import clearance_predicates, combine, p_norefs
from .generate import GenParams, gen_equiv_pair, random_config
from .labels import PUB, SEC, TWO_POINT, Label, Powerset, join, leq, meet
from .niharness import (INCONCLUSIVE, PASS, VIOLATION, NIVerdict, check_tini, check_tsni,
                        run_suite)
from .runtime import RR, SEQ, Semantics, kappa_empty, kappa_identity, run, step_config
from .surface import parse_program, parse_term, pretty

# Spinning receives nest boundaries deeply; the walkers recurse on term depth.
if sys.getrecursionlimit() < 10000:
    sys.setrecursionlimit(10000)

__all__ = [
    "ConcreteConfiguration", "ConcreteSemantics", "CTask", "check_functorial", "iso_f",
    "iso_f_inv", "wf", "Configuration", "Task", "make_config", "erase_config", "erase_term",
    "l_equiv", "clearance_predicates", "combine", "p_norefs", "GenParams", "gen_equiv_pair",
    "random_config", "PUB", "SEC", "TWO_POINT", "Label", "Powerset", "join", "leq", "meet",
    "INCONCLUSIVE", "PASS", "VIOLATION", "NIVerdict", "check_tini", "check_tsni", "run_suite",
    "RR", "SEQ", "Semantics", "kappa_empty", "kappa_identity", "run", "step_config",
    "parse_program", "parse_term", "pretty",
]
