"""Fixed-point iteration for invariant *-measures.

Starting from the indicator of the Hutchinson attractor, the iterates of
psi form a decreasing chain of hypographs whose limit is the invariant
measure.  Other seeds are supported for uniqueness probing.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, ValidationError
from .gifs import GIFSystem, attractor_set, check_contraction, psi, validate
from .measures import (
    DEFAULT_Q,
    TAU_SUPP,
    StarMeasure,
    _hypo_directed,
    dirac,
    distance,
    from_support,
    quantize,
    support,
)

__all__ = ["SolverConfig", "TraceRow", "IterationTrace", "solve", "residual", "uniqueness_probe", "seed_measure"]

SEED_STRATEGIES = ("attractor_support", "full", "dirac_corner")
MODES = ("hypograph-hausdorff", "sup")


@dataclass(frozen=True)
class SolverConfig:
    seed: str = "attractor_support"
    epsilon: float | None = None  # None: one grid-cell diagonal + 1/q
    max_iter: int = 500
    mode: str = "hypograph-hausdorff"
    q: int = DEFAULT_Q
    exact: str = "auto"  # 'auto' | 'on' | 'off'
    contraction_samples: int = 2000
    contraction_seed: int = 0
    support_floor: float = TAU_SUPP

    def __post_init__(self):
        if self.seed not in SEED_STRATEGIES:
            raise DomainError(f"unknown seed strategy {self.seed!r}")
        if self.mode not in MODES:
            raise DomainError(f"unknown convergence mode {self.mode!r}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise DomainError("epsilon must be > 0")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        if self.q < 1:
            raise DomainError("q must be >= 1")
        if not 0.0 <= self.support_floor < 1.0:
            raise DomainError("support_floor must lie in [0, 1)")
        if self.exact not in ("auto", "on", "off"):
            raise DomainError("exact must be 'auto', 'on' or 'off'")

    def eps_for(self, space) -> float:
        if self.epsilon is not None:
            return float(self.epsilon)
        return space.cell() + 1.0 / self.q


@dataclass
class TraceRow:
    step: int
    distance: float
    sup_residual: float
    support_size: int
    nesting_violation: float
    max_increase: float
    wall_time: float


@dataclass
class IterationTrace:
    epsilon: float
    mode: str
    seed: str
    rows: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    converged: bool = False
    exact: bool = False

    def __len__(self):
        return len(self.rows)

    @property
    def final_residual(self) -> float:
        return self.rows[-1].distance if self.rows else float("nan")

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def to_csv(self, timings: bool = True) -> str:
        cols = ["step", "distance", "sup_residual", "support_size", "nesting_violation", "max_increase", "wall_time"]
        lines = [",".join(cols)]
        for r in self.rows:
            wall = repr(r.wall_time) if timings else "0.0"
            lines.append(
                f"{r.step},{r.distance!r},{r.sup_residual!r},{r.support_size},"
                f"{r.nesting_violation!r},{r.max_increase!r},{wall}"
            )
        return "\n".join(lines) + "\n"


def seed_measure(system: GIFSystem, strategy: str, threads=None) -> StarMeasure:
    space = system.space
    if strategy == "attractor_support":
        return from_support(space, attractor_set(system, threads=threads))
    if strategy == "full":
        return StarMeasure(space, np.ones(space.size))
    if strategy == "dirac_corner":
        return dirac(space, 0)
    raise DomainError(f"unknown seed strategy {strategy!r}")


def _on_lattice(values, q) -> bool:
    v = np.asarray(values, dtype=float) * q
    return bool(np.all(v == np.round(v)))


def solve(system: GIFSystem, cfg: SolverConfig = SolverConfig(), force: bool = False,
          threads: int | None = None, seed_mu: StarMeasure | None = None, contraction=None):
    """Iterate psi from the configured seed until successive iterates are within epsilon.

    In exact mode (lattice-closed norm, lattice weights and seed) the loop
    runs on to an exact fixed point, i.e. distance 0.  Returns the measure
    and its :class:`IterationTrace`; raises :class:`ConvergenceError` after
    ``max_iter`` steps.
    """
    validate(system).raise_if_failed()
    eps = cfg.eps_for(system.space)
    trace = IterationTrace(eps, cfg.mode, cfg.seed if seed_mu is None else "custom")
    if contraction is None:
        contraction = check_contraction(system, cfg.contraction_samples, cfg.contraction_seed)
    if not contraction.contractive:
        msg = f"system is not contractive ({contraction.summary()})"
        if not force:
            raise ValidationError([msg + "; rerun with force to iterate anyway"])
        trace.warnings.append(msg)

    mu = seed_measure(system, cfg.seed, threads) if seed_mu is None else seed_mu
    exact = cfg.exact == "on" or (
        cfg.exact == "auto"
        and system.tnorm.lattice_closed()
        and _on_lattice(system.weights, cfg.q)
        and _on_lattice(mu.values, cfg.q)
    )
    trace.exact = exact
    q = cfg.q
    fallback = None
    for k in range(cfg.max_iter):
        t0 = time.perf_counter()
        nu = psi(system, mu, threads, tau_supp=cfg.support_floor)
        d = distance(mu, nu, cfg.mode, q)
        uq, vq = quantize(mu.values, q), quantize(nu.values, q)
        nest = 0.0 if np.all(vq <= uq) else _hypo_directed(system.space, vq, uq, q)
        trace.rows.append(TraceRow(
            step=k,
            distance=d,
            sup_residual=float(np.abs(nu.values - mu.values).max()),
            support_size=int(support(mu).size),
            nesting_violation=float(nest),
            max_increase=float(np.maximum(nu.values - mu.values, 0.0).max()),
            wall_time=time.perf_counter() - t0,
        ))
        if d <= eps:
            fallback = mu
            if not exact or d == 0.0:
                trace.converged = True
                return mu, trace
        mu = nu
    if fallback is not None:
        trace.warnings.append("no exact fixed point within max_iter; returning the last epsilon-converged iterate")
        trace.converged = True
        return fallback, trace
    raise ConvergenceError(f"no convergence within {cfg.max_iter} iterations", trace, mu)


def residual(system: GIFSystem, mu: StarMeasure, mode: str = "hypograph-hausdorff", q: int = DEFAULT_Q,
             threads: int | None = None) -> float:
    return distance(mu, psi(system, mu, threads), mode, q)


@dataclass
class ProbeResult:
    max_distance: float
    limits: dict
    traces: dict
    warnings: list

    def within(self, eps: float) -> bool:
        return self.max_distance <= 2 * eps


def uniqueness_probe(system: GIFSystem, cfg: SolverConfig, strategies, force: bool = False,
                     threads: int | None = None) -> ProbeResult:
    """Solve from several seeds and report the largest pairwise distance of the limits."""
    strategies = list(strategies)
    if len(strategies) < 2:
        raise DomainError("need at least two seed strategies")
    contraction = check_contraction(system, cfg.contraction_samples, cfg.contraction_seed)
    warnings = []
    if not contraction.contractive:
        warnings.append(f"system is not contractive ({contraction.summary()}); uniqueness is not expected")
    limits, traces = {}, {}
    for s in strategies:
        c = SolverConfig(**{**cfg.__dict__, "seed": s})
        limits[s], traces[s] = solve(system, c, force=force, threads=threads, contraction=contraction)
    worst = 0.0
    for a, b in itertools.combinations(strategies, 2):
        worst = max(worst, distance(limits[a], limits[b], cfg.mode, cfg.q))
    return ProbeResult(worst, limits, traces, warnings)
