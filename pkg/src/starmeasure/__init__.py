"""Invariant idempotent *-measures of generalized iterated function systems."""
from .errors import (
    ConvergenceError,
    DomainError,
    GroupError,
    MapRangeError,
    SizeCapError,
    StarMeasureError,
    ValidationError,
)
from .tnorms import TNorm, eval_tnorm, fold, get_tnorm, verify_axioms
from .spaces import FiniteSpace, GridSpace, PermGroup, SymPowerSpace, hausdorff, orbit_rep, snap, sym_distance
from .measures import StarMeasure, TestFunction, WeightFunction, dirac, distance, evaluate, from_support
from .gifs import AffineMap, GIFSystem, TableMap, attractor_set, check_contraction, hutchinson_step, psi, validate
from .fixpoint import SolverConfig, residual, solve, uniqueness_probe
from . import kernels

__version__ = "0.1.0"
