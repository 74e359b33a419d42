"""Generalized iterated function systems of *-measures.

A system is a list of maps g_i from the G-symmetric power SP^m_G X to X,
weights alpha_i with max alpha_i = 1, and a t-norm.  :func:`psi` is the
fused kernel: it enumerates G-orbit representatives of the support, folds
the tensor value, applies each map, snaps and max-accumulates.  The tensor
power itself is never materialized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import DomainError, MapRangeError, ValidationError
from .measures import TAU_SUPP, StarMeasure, WeightFunction
from .spaces import TAU_BOX, FiniteSpace, GridSpace, PermGroup, hausdorff, orbit_rep, snap
from .tnorms import TNorm, get_tnorm

__all__ = [
    "AffineMap",
    "TableMap",
    "GIFSystem",
    "ValidationReport",
    "ContractionReport",
    "validate",
    "psi",
    "hutchinson_step",
    "attractor_set",
    "check_contraction",
]


class AffineMap:
    """g(x_1, ..., x_m) = sum_j A_j x_j + b on R^d."""

    def __init__(self, blocks, offset):
        blocks = np.array(blocks, dtype=float)
        offset = np.array(offset, dtype=float).reshape(-1)
        d = offset.shape[0]
        if blocks.ndim == 2:
            blocks = blocks.reshape(blocks.shape[0], d, d)
        if blocks.ndim != 3 or blocks.shape[1:] != (d, d):
            raise DomainError(f"affine blocks must have shape (m, {d}, {d}), got {blocks.shape}")
        blocks.setflags(write=False)
        offset.setflags(write=False)
        self.blocks = blocks
        self.offset = offset

    @property
    def m(self) -> int:
        return self.blocks.shape[0]

    @property
    def dim(self) -> int:
        return self.offset.shape[0]

    def contributions(self, coords: np.ndarray) -> np.ndarray:
        """Per-slot terms A_j c for every row c of ``coords``: shape (m, K, d).

        Evaluated with a fixed summation order (no BLAS) so a point's term
        does not depend on which other points are in the batch.
        """
        coords = np.asarray(coords, dtype=float)
        K, d = coords.shape
        out = np.empty((self.m, K, d))
        for j in range(self.m):
            A = self.blocks[j]
            for r in range(d):
                acc = A[r, 0] * coords[:, 0]
                for k in range(1, d):
                    acc = acc + A[r, k] * coords[:, k]
                out[j, :, r] = acc
        return out

    def apply(self, coords_tuple) -> np.ndarray:
        """Raw image of an m-tuple of coordinate vectors."""
        pts = np.asarray(coords_tuple, dtype=float).reshape(self.m, self.dim)
        c = self.offset
        for j in range(self.m):
            c = c + self.contributions(pts[j:j + 1])[j, 0]
        return c

    def image_bounds(self, lo, hi):
        """Exact per-axis range of g over box^m (interval arithmetic)."""
        lo_t = self.offset.copy()
        hi_t = self.offset.copy()
        for A in self.blocks:
            a, b = A * lo[None, :], A * hi[None, :]
            lo_t = lo_t + np.minimum(a, b).sum(axis=1)
            hi_t = hi_t + np.maximum(a, b).sum(axis=1)
        return lo_t, hi_t

    def is_invariant(self, group: PermGroup) -> bool:
        # g(x o s) = g(x) for all x  <=>  A_j = A_{s(j)} for every j
        return all(
            np.array_equal(self.blocks[j], self.blocks[s[j]]) for s in group.elements for j in range(self.m)
        )

    def __repr__(self):
        return f"AffineMap(m={self.m}, d={self.dim})"


class TableMap:
    """A map on a finite space given by a table of point indices, shape (N,)*m."""

    def __init__(self, table):
        table = np.array(table, dtype=np.int64)
        if table.ndim == 0:
            raise DomainError("table map needs at least one axis")
        table.setflags(write=False)
        self.table = table

    @property
    def m(self) -> int:
        return self.table.ndim

    def __call__(self, x) -> int:
        return int(self.table[tuple(x)])

    def is_invariant(self, group: PermGroup) -> bool:
        for s in group.elements:
            if not np.array_equal(self.table, np.transpose(self.table, axes=_inv(s))):
                return False
        return True

    def __repr__(self):
        return f"TableMap(m={self.m}, N={self.table.shape[0]})"


def _inv(s):
    inv = [0] * len(s)
    for i, j in enumerate(s):
        inv[j] = i
    return inv


@dataclass(frozen=True, eq=False)
class GIFSystem:
    space: object
    m: int
    group: PermGroup
    maps: tuple
    weights: tuple
    tnorm: TNorm = TNorm.MINIMUM
    names: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "tnorm", get_tnorm(self.tnorm))

    @property
    def n(self) -> int:
        return len(self.maps)

    @cached_property
    def report(self) -> "ValidationReport":
        return _validate(self)

    @cached_property
    def contributions(self) -> np.ndarray:
        """Per-map, per-slot affine terms for every node: shape (n, m, N, d)."""
        return np.stack([g.contributions(self.space.coords) for g in self.maps])

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.stack([g.offset for g in self.maps])

    @cached_property
    def tables(self) -> np.ndarray:
        return np.stack([g.table.reshape(-1) for g in self.maps]).astype(np.int64)

    def image(self, i: int, x):
        """Raw image of the point-index tuple ``x`` under map ``i``."""
        g = self.maps[i]
        if isinstance(g, TableMap):
            return g(x)
        C = self.contributions
        c = self.offsets[i]
        for j, p in enumerate(x):
            c = c + C[i, j, int(p)]
        return c

    def snapped_image(self, i: int, x) -> int:
        img = self.image(i, x)
        if isinstance(self.space, GridSpace):
            return snap(self.space, img, map_index=i, source=tuple(int(v) for v in x))
        return int(img)


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_if_failed(self):
        if self.errors:
            raise ValidationError(self.errors)

    def as_dict(self) -> dict:
        return {"ok": self.ok, "errors": list(self.errors)}


def validate(system: GIFSystem) -> ValidationReport:
    """Check weights, arities, G-invariance and box range of every map."""
    return system.report


def _validate(system: GIFSystem) -> ValidationReport:
    errs = []
    w = system.weights
    if system.n == 0:
        errs.append("system has no maps")
    if len(w) != system.n:
        errs.append(f"{len(w)} weights for {system.n} maps")
    bad_w = [i for i, a in enumerate(w) if not 0.0 <= a <= 1.0]
    if bad_w:
        errs.append(f"weights outside [0, 1] at indices {bad_w}")
    if w and max(w) != 1.0:
        errs.append(f"max weight must equal 1 (got {max(w)!r})")
    if system.m < 1:
        errs.append("arity m must be >= 1")
    if system.group.m != system.m:
        errs.append(f"group arity {system.group.m} differs from m={system.m}")
    space = system.space
    for i, g in enumerate(system.maps):
        if g.m != system.m:
            errs.append(f"map {i} has arity {g.m}, expected {system.m}")
            continue
        if isinstance(g, AffineMap):
            if not isinstance(space, GridSpace):
                errs.append(f"map {i}: affine maps need a grid space")
                continue
            if g.dim != space.dim:
                errs.append(f"map {i}: dimension {g.dim} differs from grid dimension {space.dim}")
                continue
            lo_t, hi_t = g.image_bounds(space.lo, space.hi)
            if np.any(lo_t < space.lo - TAU_BOX) or np.any(hi_t > space.hi + TAU_BOX):
                errs.append(
                    f"map {i} leaves the box: image range {list(zip(lo_t.tolist(), hi_t.tolist()))}"
                )
        elif isinstance(g, TableMap):
            if not isinstance(space, FiniteSpace):
                errs.append(f"map {i}: table maps need a finite (table) space")
                continue
            if g.table.shape != (space.size,) * system.m:
                errs.append(f"map {i}: table shape {g.table.shape} does not match {(space.size,) * system.m}")
                continue
            if g.table.min() < 0 or g.table.max() >= space.size:
                errs.append(f"map {i}: table entries outside the point range")
        else:
            errs.append(f"map {i}: unsupported map type {type(g).__name__}")
            continue
        if system.group.m == system.m and not g.is_invariant(system.group):
            errs.append(f"map {i} is not invariant under the permutation group")
    return ValidationReport(errs)


def _enum_mode(group: PermGroup, enumeration: str) -> int:
    if enumeration == "full" or group.is_trivial():
        return 0
    if group.is_full_symmetric():
        return 1
    return 2


def _run(system: GIFSystem, values: np.ndarray, code: int, alphas, threads, enumeration, tau_supp=TAU_SUPP):
    """Shared driver for psi and the Hutchinson step; returns the raw accumulator."""
    sup = np.flatnonzero(values > tau_supp).astype(np.int64)
    N = system.space.size
    if sup.size == 0:
        return np.zeros(N)
    uvals = np.ascontiguousarray(values[sup], dtype=float)
    mode = _enum_mode(system.group, enumeration)
    perms = np.ascontiguousarray(system.group.as_array())
    alphas = np.ascontiguousarray(alphas, dtype=float)
    be = kernels.backend
    space = system.space
    if isinstance(space, GridSpace):
        contrib = np.ascontiguousarray(system.contributions[:, :, sup, :])
        offsets = np.ascontiguousarray(system.offsets)

        def fn(start, stop, out):
            return be.psi_affine(uvals, system.m, mode, perms, code, alphas, contrib, offsets,
                                 space.lo, space.hi, space.step, space.resolution, space.strides,
                                 TAU_BOX, tau_supp, start, stop, out)
    else:
        tables = np.ascontiguousarray(system.tables)

        def fn(start, stop, out):
            return be.psi_table(uvals, sup, system.m, mode, perms, code, alphas, tables, N,
                                tau_supp, start, stop, out)

    out, err = kernels.run_partitioned(fn, sup.size, N, threads)
    if err is not None:
        i, pos, coords = err
        tup = tuple(int(sup[p]) for p in pos)
        raise MapRangeError(f"map {i} sent tuple {tup} to {coords}, outside the box", i, tup)
    return out


def psi(system: GIFSystem, mu: WeightFunction, threads: int | None = None, enumeration: str = "orbit",
        tau_supp: float = TAU_SUPP):
    """One application of the invariance operator to the tensor power of ``mu``.

    ``enumeration='full'`` walks every m-tuple instead of one representative
    per G-orbit; the output must be identical.  Tensor values at or below
    ``tau_supp`` count as 0.
    """
    validate(system).raise_if_failed()
    if mu.space != system.space:
        raise DomainError("measure and system live on different spaces")
    out = _run(system, mu.values, system.tnorm.code, system.weights, threads, enumeration, tau_supp)
    if isinstance(mu, StarMeasure):
        return StarMeasure(system.space, out)
    return WeightFunction(system.space, out)


def hutchinson_step(system: GIFSystem, A, threads: int | None = None) -> np.ndarray:
    """Union over i of g_i applied to the orbit representatives of A^m (sorted indices)."""
    ind = np.zeros(system.space.size)
    idx = np.asarray(list(A), dtype=np.int64)
    if idx.size == 0:
        raise DomainError("Hutchinson step of an empty set")
    ind[idx] = 1.0
    out = _run(system, ind, TNorm.MINIMUM.code, np.ones(system.n), threads, "orbit")
    return np.flatnonzero(out > 0)


def attractor_set(system: GIFSystem, max_iter: int = 10_000, tol: float = 0.0, threads: int | None = None) -> np.ndarray:
    """Iterate the Hutchinson map from the whole space until successive sets are within ``tol``.

    The snapped map is monotone and the first step shrinks X, so the
    sequence is nested decreasing and reaches an exact fixed set.
    """
    from .errors import ConvergenceError

    validate(system).raise_if_failed()
    A = np.arange(system.space.size)
    for _ in range(max_iter):
        B = hutchinson_step(system, A, threads)
        if np.array_equal(A, B) or hausdorff(system.space, A, B) <= tol:
            return B
        A = B
    raise ConvergenceError(f"Hutchinson iteration did not settle within {max_iter} steps")


@dataclass
class ContractionReport:
    thresholds: list
    alphas: list  # alphas[i][k]: estimate for map i at thresholds[k]
    counts: list  # pairs with sym distance >= thresholds[k]
    samples: int
    seed: int

    @property
    def map_verdicts(self) -> list:
        return [all(a < 1.0 for a in row) for row in self.alphas]

    @property
    def contractive(self) -> bool:
        return all(self.map_verdicts)

    @property
    def verdict(self) -> str:
        return "contractive" if self.contractive else "not contractive"

    def summary(self) -> str:
        n_pairs = self.counts[-1] if self.counts else 0
        if self.contractive:
            return f"no violation found among {n_pairs} pairs"
        bad = [i for i, ok in enumerate(self.map_verdicts) if not ok]
        return f"ratio >= 1 found for maps {bad} among {n_pairs} pairs"

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "summary": self.summary(),
            "samples": self.samples,
            "seed": self.seed,
            "thresholds": self.thresholds,
            "pair_counts": self.counts,
            "maps": [
                {"index": i, "alpha": row, "contractive": ok}
                for i, (row, ok) in enumerate(zip(self.alphas, self.map_verdicts))
            ],
        }


def _pair_sym_distances(system, X, Y):
    """d-hat between rows of X and Y (arrays of point-index tuples)."""
    space = system.space
    m = system.m
    if isinstance(space, GridSpace):
        C = space.coords
        if space.metric == "chebyshev":
            dist = lambda a, b: np.abs(C[a] - C[b]).max(axis=-1)  # noqa: E731
        else:
            dist = lambda a, b: np.sqrt(((C[a] - C[b]) ** 2).sum(axis=-1))  # noqa: E731
    else:
        T = space.table
        dist = lambda a, b: T[a, b]  # noqa: E731
    best = None
    for s in system.group.elements:
        cur = np.max(np.stack([dist(X[:, i], Y[:, s[i]]) for i in range(m)]), axis=0)
        best = cur if best is None else np.minimum(best, cur)
    return best


def _image_distances(system, i, X, Y):
    space = system.space
    g = system.maps[i]
    if isinstance(g, TableMap):
        gx = g.table[tuple(X.T)]
        gy = g.table[tuple(Y.T)]
        return space.table[gx, gy]
    C = system.contributions
    cx = system.offsets[i]
    cy = system.offsets[i]
    for j in range(system.m):
        cx = cx + C[i, j][X[:, j]]
        cy = cy + C[i, j][Y[:, j]]
    diff = np.abs(cx - cy)
    if space.metric == "chebyshev":
        return diff.max(axis=1)
    return np.sqrt((diff ** 2).sum(axis=1))


def check_contraction(system: GIFSystem, samples: int = 2000, seed: int = 0) -> ContractionReport:
    """Estimate the thresholded Lipschitz constants of every map by sampling.

    For each threshold t = diam / 2^k down to one cell, alpha(t) is the
    largest ratio d(g(x), g(y)) / d-hat(x, y) over sampled pairs with
    d-hat(x, y) >= t.  Ratios use unsnapped images.  A sampler, not a proof.
    """
    if samples < 2:
        raise DomainError("need at least 2 samples")
    space = system.space
    N, m = space.size, system.m
    rng = np.random.default_rng(seed)
    X = rng.integers(0, N, size=(samples, m))
    # half the pairs are random, half are local perturbations to probe small scales
    Y = rng.integers(0, N, size=(samples, m))
    half = samples // 2
    if isinstance(space, GridSpace) and half:
        multi = np.array(np.unravel_index(X[:half], tuple(space.resolution)))  # (d, half, m)
        jump = rng.integers(-2, 3, size=multi.shape)
        res = space.resolution.reshape(-1, 1, 1)
        moved = np.clip(multi + jump, 0, res - 1)
        Y[:half] = np.ravel_multi_index(tuple(moved), tuple(space.resolution))
    elif half:
        Y[:half] = np.where(rng.random((half, m)) < 0.5, X[:half], Y[:half])
    # the two extreme diagonal tuples realize the diameter
    if isinstance(space, GridSpace):
        X = np.vstack([X, np.zeros((1, m), dtype=np.int64)])
        Y = np.vstack([Y, np.full((1, m), N - 1, dtype=np.int64)])
    else:
        i, j = np.unravel_index(np.argmax(space.table), space.table.shape)
        X = np.vstack([X, np.full((1, m), i, dtype=np.int64)])
        Y = np.vstack([Y, np.full((1, m), j, dtype=np.int64)])
    X = np.array([orbit_rep(system.group, r) for r in X], dtype=np.int64)
    Y = np.array([orbit_rep(system.group, r) for r in Y], dtype=np.int64)
    dh = _pair_sym_distances(system, X, Y)
    keep = dh > 0
    X, Y, dh = X[keep], Y[keep], dh[keep]

    diam = space.diameter()
    cell = space.cell()
    thresholds = [diam]
    while cell > 0 and thresholds[-1] / 2 >= cell * (1 - 1e-12):
        thresholds.append(thresholds[-1] / 2)
    counts = [int((dh >= t * (1 - 1e-12)).sum()) for t in thresholds]
    alphas = []
    for i in range(system.n):
        ratio = _image_distances(system, i, X, Y) / dh
        row = []
        for t in thresholds:
            sel = dh >= t * (1 - 1e-12)
            row.append(float(ratio[sel].max()) if sel.any() else 0.0)
        alphas.append(row)
    return ContractionReport([float(t) for t in thresholds], alphas, counts, samples, seed)
