"""YAML run configuration: parsing and schema validation.

Schema (all numbers decimal; unknown keys are rejected)::

    seed: 0                      # global seed (contraction sampler, dictionaries)
    space:
      kind: grid                 # grid | table
      box: [[0.0, 1.0], ...]     # grid: one [lo, hi] per axis
      resolution: [1025, ...]    # grid: nodes per axis, each >= 2
      metric: chebyshev          # grid: chebyshev | euclidean
      table: [[0, 1], [1, 0]]    # table: explicit distance matrix
    group:
      generators: [[2, 1]]       # 1-based permutations of 1..m; empty = trivial group
    gifs:
      m: 2
      tnorm: product             # product | min | lukasiewicz
      weights: [1.0, 0.5]        # one per map, max must be 1
      maps:
        - A: [[0.25], [0.25]]    # grid: m blocks, each d*d numbers row-major
          b: [0.0]
        - table: [...]           # table space: nested N x ... x N list of point indices
    solver:
      seed_strategy: attractor_support   # attractor_support | full | dirac_corner
      epsilon: null              # default: one grid-cell diagonal + 1/q
      max_iter: 500
      mode: hypograph-hausdorff  # hypograph-hausdorff | sup
      q: 256
      exact: auto                # auto | on | off
      support_floor: 1.0e-30
      contraction_samples: 2000
    output:
      render: true               # write render.pgm (2D image or 1 x N strip)
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import StarMeasureError, ValidationError
from .fixpoint import SolverConfig
from .gifs import AffineMap, GIFSystem, TableMap, validate
from .spaces import FiniteSpace, GridSpace, PermGroup
from .tnorms import get_tnorm

__all__ = ["RunConfig", "ConfigError", "load_config", "parse_config"]

_TOP = {"seed", "space", "group", "gifs", "solver", "output"}
_SPACE = {"kind", "box", "resolution", "metric", "table"}
_GROUP = {"generators"}
_GIFS = {"m", "tnorm", "weights", "maps"}
_MAP = {"A", "b", "table"}
_SOLVER = {"seed_strategy", "epsilon", "max_iter", "mode", "q", "exact", "support_floor", "contraction_samples"}
_OUTPUT = {"render"}


class ConfigError(ValidationError):
    """Schema violations; each entry is prefixed with its key path."""


@dataclass
class RunConfig:
    space: object
    group: PermGroup
    system: GIFSystem
    solver: SolverConfig
    seed: int = 0
    render: bool = True
    raw: dict = field(default_factory=dict)
    source: str | None = None


def _num(v):
    # YAML 1.1 reads "1e-30" (no dot) as a string
    if isinstance(v, bool):
        raise TypeError("boolean where a number was expected")
    if isinstance(v, str):
        return float(v)
    if isinstance(v, (int, float)):
        return v
    raise TypeError(f"expected a number, got {type(v).__name__}")


def _unknown(d, allowed, path, errs):
    if not isinstance(d, dict):
        errs.append(f"{path}: expected a mapping")
        return False
    for k in d:
        if k not in allowed:
            errs.append(f"{path}.{k}: unknown key" if path else f"{k}: unknown key")
    return True


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"parse error: {exc}"]) from None
    cfg = parse_config(data)
    cfg.source = str(path)
    return cfg


def parse_config(data) -> RunConfig:
    """Build validated domain objects from a parsed config tree."""
    errs: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["config root must be a mapping"])
    raw = copy.deepcopy(data)
    _unknown(data, _TOP, "", errs)
    missing = [f"{key}: missing section" for key in ("space", "gifs") if key not in data]
    if missing:
        raise ConfigError(errs + missing)

    seed = 0
    try:
        seed = int(data.get("seed", 0))
    except (TypeError, ValueError):
        errs.append("seed: expected an integer")

    space = _parse_space(data["space"], errs)
    gifs = data["gifs"]
    m = 1
    if _unknown(gifs, _GIFS, "gifs", errs):
        try:
            m = int(gifs.get("m", 1))
            if m < 1:
                raise ValueError
        except (TypeError, ValueError):
            errs.append("gifs.m: expected a positive integer")
            m = 1
    group = _parse_group(data.get("group") or {}, m, errs)
    system = _parse_gifs(gifs, space, group, m, errs) if isinstance(gifs, dict) else None
    solver = _parse_solver(data.get("solver") or {}, seed, errs)
    render = True
    out = data.get("output") or {}
    if _unknown(out, _OUTPUT, "output", errs):
        render = bool(out.get("render", True))
    if errs:
        raise ConfigError(errs)
    report = validate(system)
    if not report.ok:
        raise ConfigError([f"gifs: {e}" for e in report.errors])
    return RunConfig(space, group, system, solver, seed, render, raw)


def _parse_space(sp, errs):
    if not _unknown(sp, _SPACE, "space", errs):
        return None
    kind = sp.get("kind", "grid")
    try:
        if kind == "grid":
            for k in ("box", "resolution"):
                if k not in sp:
                    errs.append(f"space.{k}: required for grid spaces")
                    return None
            box = [[_num(a) for a in iv] for iv in sp["box"]]
            res = [int(r) for r in sp["resolution"]]
            return GridSpace(box, res, sp.get("metric", "chebyshev"))
        if kind == "table":
            if "table" not in sp:
                errs.append("space.table: required for table spaces")
                return None
            return FiniteSpace([[_num(v) for v in row] for row in sp["table"]])
        errs.append(f"space.kind: expected 'grid' or 'table', got {kind!r}")
    except (StarMeasureError, TypeError, ValueError) as exc:
        errs.append(f"space: {exc}")
    return None


def _parse_group(gr, m, errs):
    if not _unknown(gr, _GROUP, "group", errs):
        return PermGroup.trivial(m)
    gens = gr.get("generators") or []
    for i, g in enumerate(gens):
        if not isinstance(g, list) or len(g) != m:
            errs.append(f"group.generators[{i}]: expected a permutation of 1..{m}, got {g!r}")
        elif sorted(g) != list(range(1, m + 1)):
            errs.append(f"group.generators[{i}]: {g!r} is not a permutation of 1..{m}")
    if errs:
        return PermGroup.trivial(m)
    try:
        return PermGroup.generated(m, gens, one_based=True)
    except StarMeasureError as exc:
        errs.append(f"group.generators: {exc}")
        return PermGroup.trivial(m)


def _parse_gifs(gifs, space, group, m, errs):
    try:
        tnorm = get_tnorm(gifs.get("tnorm", "min"))
    except StarMeasureError as exc:
        errs.append(f"gifs.tnorm: {exc}")
        return None
    weights = gifs.get("weights")
    maps_raw = gifs.get("maps")
    if not isinstance(weights, list) or not weights:
        errs.append("gifs.weights: expected a nonempty list")
        return None
    try:
        weights = [float(_num(w)) for w in weights]
    except (TypeError, ValueError) as exc:
        errs.append(f"gifs.weights: {exc}")
        return None
    if any(not 0.0 <= w <= 1.0 for w in weights):
        errs.append("gifs.weights: every weight must lie in [0, 1]")
    elif max(weights) != 1.0:
        errs.append("gifs.weights: max weight must equal 1")
    if not isinstance(maps_raw, list) or not maps_raw:
        errs.append("gifs.maps: expected a nonempty list")
        return None
    if len(maps_raw) != len(weights):
        errs.append(f"gifs.weights: {len(weights)} weights for {len(maps_raw)} maps")
    if space is None:
        return None
    maps = []
    for i, mr in enumerate(maps_raw):
        path = f"gifs.maps[{i}]"
        if not _unknown(mr, _MAP, path, errs):
            continue
        try:
            if isinstance(space, GridSpace):
                if "A" not in mr or "b" not in mr:
                    errs.append(f"{path}: grid maps need 'A' and 'b'")
                    continue
                d = space.dim
                blocks = [[float(_num(v)) for v in blk] for blk in mr["A"]]
                if len(blocks) != m or any(len(blk) != d * d for blk in blocks):
                    errs.append(f"{path}.A: expected {m} blocks of {d}x{d} numbers")
                    continue
                b = [float(_num(v)) for v in mr["b"]]
                if len(b) != d:
                    errs.append(f"{path}.b: expected {d} numbers")
                    continue
                maps.append(AffineMap(np.array(blocks).reshape(m, d, d), b))
            else:
                if "table" not in mr:
                    errs.append(f"{path}: table spaces need a 'table' map")
                    continue
                tab = np.array(mr["table"], dtype=np.int64)
                if tab.ndim == 1 and tab.size == space.size ** m:
                    tab = tab.reshape((space.size,) * m)
                maps.append(TableMap(tab))
        except (StarMeasureError, TypeError, ValueError) as exc:
            errs.append(f"{path}: {exc}")
    if errs:
        return None
    return GIFSystem(space, m, group, maps, weights, tnorm)


def _parse_solver(so, seed, errs):
    if not _unknown(so, _SOLVER, "solver", errs):
        return SolverConfig()
    kw = {}
    try:
        if "seed_strategy" in so:
            kw["seed"] = so["seed_strategy"]
        if so.get("epsilon") is not None:
            kw["epsilon"] = float(_num(so["epsilon"]))
        for k in ("max_iter", "q", "contraction_samples"):
            if k in so:
                kw[k] = int(so[k])
        if "mode" in so:
            kw["mode"] = so["mode"]
        if "exact" in so:
            kw["exact"] = str(so["exact"])
        if "support_floor" in so:
            kw["support_floor"] = float(_num(so["support_floor"]))
        kw["contraction_seed"] = seed
        return SolverConfig(**kw)
    except (StarMeasureError, TypeError, ValueError) as exc:
        errs.append(f"solver: {exc}")
        return SolverConfig()
