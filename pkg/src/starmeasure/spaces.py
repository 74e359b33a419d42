"""Finite metric spaces, regular grids, permutation groups and symmetric powers.

Points are always identified by their integer index; coordinates are only
used to evaluate the metric and to feed affine maps.  This keeps orbit
canonicalization exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DomainError, GroupError, MapRangeError

__all__ = [
    "FiniteSpace",
    "GridSpace",
    "PermGroup",
    "SymPowerSpace",
    "power_distance",
    "orbit_rep",
    "sym_distance",
    "project_HG",
    "snap",
    "hausdorff",
    "hausdorff_arrays",
    "TAU_BOX",
    "MAX_GROUP_ORDER",
]

TAU_BOX = 1e-9
# near-ties within this many cells go to the lower node
TIE_EPS = 1e-9
MAX_GROUP_ORDER = 720


class _Space:
    """Behaviour shared by explicit tables and grids."""

    size: int

    def _check(self, p) -> int:
        try:
            i = int(p)
        except (TypeError, ValueError):
            raise DomainError(f"point {p!r} is not a point index") from None
        if i != p or not 0 <= i < self.size:
            raise DomainError(f"point {p!r} not in space of {self.size} points")
        return i

    def indices(self) -> np.ndarray:
        return np.arange(self.size)

    def __len__(self):
        return self.size


class FiniteSpace(_Space):
    """A finite metric space given by an explicit distance table.

    The table is checked on construction: symmetric, zero exactly on the
    diagonal and obeying the triangle inequality.
    """

    def __init__(self, metric, labels: Sequence | None = None, tol: float = 1e-12):
        table = np.array(metric, dtype=float)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise DomainError("metric table must be a nonempty square matrix")
        n = table.shape[0]
        if not np.allclose(table, table.T, atol=tol, rtol=0):
            raise DomainError("metric table is not symmetric")
        if np.any(np.diag(table) != 0):
            raise DomainError("metric table has nonzero diagonal")
        off = table[~np.eye(n, dtype=bool)]
        if off.size and off.min() <= 0:
            raise DomainError("metric table has a nonpositive off-diagonal entry")
        # d(i,k) <= d(i,j) + d(j,k) for all triples
        if n > 2:
            through = (table[:, :, None] + table[None, :, :]).min(axis=1)
            if np.any(table > through + tol):
                raise DomainError("metric table violates the triangle inequality")
        table.setflags(write=False)
        self.table = table
        self.size = n
        self.labels = tuple(labels) if labels is not None else tuple(range(n))

    @classmethod
    def from_points(cls, coords, metric: str = "chebyshev") -> "FiniteSpace":
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        return cls(cdist(coords, coords, metric=_scipy_metric(metric)))

    def product(self, other: "FiniteSpace") -> "FiniteSpace":
        """X x Y with the max metric; point (x, y) has index x * |Y| + y."""
        a = np.repeat(np.repeat(self.table, other.size, axis=0), other.size, axis=1)
        b = np.tile(other.table, (self.size, self.size))
        return FiniteSpace(np.maximum(a, b))

    def distance(self, p, q) -> float:
        return float(self.table[self._check(p), self._check(q)])

    def distance_matrix(self, a=None, b=None) -> np.ndarray:
        a = self.indices() if a is None else np.asarray(a, dtype=np.int64)
        b = self.indices() if b is None else np.asarray(b, dtype=np.int64)
        return self.table[np.ix_(a, b)]

    def diameter(self) -> float:
        return float(self.table.max())

    def cell(self) -> float:
        """Smallest positive distance; plays the role of one grid cell."""
        if self.size == 1:
            return 0.0
        return float(self.table[~np.eye(self.size, dtype=bool)].min())

    def __eq__(self, other):
        return isinstance(other, FiniteSpace) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.size, self.table.tobytes()))

    def __repr__(self):
        return f"FiniteSpace(size={self.size})"


def _scipy_metric(name: str) -> str:
    name = name.lower()
    if name not in ("chebyshev", "euclidean"):
        raise DomainError(f"unknown metric {name!r}")
    return name


class GridSpace(_Space):
    """Regular lattice of nodes over a box in R^d.

    Node ``(i_0, ..., i_{d-1})`` has flat index in C order, so axis 0 varies
    slowest.  The default metric is Chebyshev (maximum over coordinates).
    """

    def __init__(self, box, resolution, metric: str = "chebyshev"):
        box = np.array(box, dtype=float).reshape(-1, 2)
        res = np.array(resolution, dtype=np.int64).reshape(-1)
        if box.shape[0] != res.shape[0]:
            raise DomainError("box and resolution disagree on the dimension")
        if np.any(res < 2):
            raise DomainError("every axis needs at least 2 nodes")
        if np.any(box[:, 1] <= box[:, 0]):
            raise DomainError("box intervals must have lo < hi")
        self.dim = int(box.shape[0])
        self.lo = box[:, 0].copy()
        self.hi = box[:, 1].copy()
        self.resolution = res
        self.step = (self.hi - self.lo) / (res - 1)
        self.metric = _scipy_metric(metric)
        self.size = int(np.prod(res))
        # C-order strides of the flat index
        self.strides = np.array([int(np.prod(res[k + 1:])) for k in range(self.dim)], dtype=np.int64)
        axes = [self.lo[k] + self.step[k] * np.arange(res[k]) for k in range(self.dim)]
        # pin the far end exactly on hi
        for k in range(self.dim):
            axes[k][-1] = self.hi[k]
        self.axes = axes
        mesh = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=1)
        coords.setflags(write=False)
        self.coords = coords

    def coordinates(self, p) -> np.ndarray:
        return self.coords[self._check(p)]

    def index_of(self, point) -> int:
        """Flat index of the node located exactly at ``point``."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        idx = snap(self, point)
        if np.max(np.abs(self.coords[idx] - point)) > TAU_BOX:
            raise DomainError(f"{tuple(point)} is not a node of the grid")
        return idx

    def _metric_vec(self, diff) -> float:
        diff = np.abs(diff)
        if self.metric == "chebyshev":
            return float(diff.max())
        return float(np.sqrt((diff ** 2).sum()))

    def distance(self, p, q) -> float:
        return self._metric_vec(self.coords[self._check(p)] - self.coords[self._check(q)])

    def coord_distance(self, x, y) -> float:
        """Distance between raw coordinate vectors (not necessarily nodes)."""
        return self._metric_vec(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))

    def distance_matrix(self, a=None, b=None) -> np.ndarray:
        a = self.indices() if a is None else np.asarray(a, dtype=np.int64)
        b = self.indices() if b is None else np.asarray(b, dtype=np.int64)
        return cdist(self.coords[a], self.coords[b], metric=self.metric)

    def diameter(self) -> float:
        return self._metric_vec(self.hi - self.lo)

    def cell(self) -> float:
        """Diagonal of one lattice cell in the space metric."""
        return self._metric_vec(self.step)

    def __eq__(self, other):
        return (
            isinstance(other, GridSpace)
            and self.metric == other.metric
            and np.array_equal(self.lo, other.lo)
            and np.array_equal(self.hi, other.hi)
            and np.array_equal(self.resolution, other.resolution)
        )

    def __hash__(self):
        return hash((self.metric, self.lo.tobytes(), self.hi.tobytes(), self.resolution.tobytes()))

    def __repr__(self):
        box = [(float(a), float(b)) for a, b in zip(self.lo, self.hi)]
        return f"GridSpace(box={box}, resolution={self.resolution.tolist()}, metric={self.metric!r})"


def snap(grid: GridSpace, p, tau: float = TAU_BOX, map_index=None, source=None) -> int:
    """Nearest lattice node to raw coordinates ``p``; ties go to the lower node.

    Raises :class:`MapRangeError` when ``p`` is outside the box inflated by
    ``tau``; ``map_index``/``source`` only enrich that message.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape != (grid.dim,):
        raise DomainError(f"expected {grid.dim} coordinates, got {p.shape}")
    if np.any(p < grid.lo - tau) or np.any(p > grid.hi + tau) or np.isnan(p).any():
        who = f"map {map_index} " if map_index is not None else ""
        at = f" at tuple {source}" if source is not None else ""
        raise MapRangeError(f"{who}sent a point to {tuple(p.tolist())}, outside the box{at}", map_index, source)
    flat = 0
    for k in range(grid.dim):
        t = (p[k] - grid.lo[k]) / grid.step[k]
        i = math.ceil(t - 0.5 - TIE_EPS)
        i = min(max(i, 0), int(grid.resolution[k]) - 1)
        flat += i * int(grid.strides[k])
    return flat


def snap_many(grid: GridSpace, pts: np.ndarray) -> np.ndarray:
    """Vectorized :func:`snap` without range checking (callers validate)."""
    t = (pts - grid.lo) / grid.step
    idx = np.ceil(t - 0.5 - TIE_EPS).astype(np.int64)
    np.clip(idx, 0, grid.resolution - 1, out=idx)
    return idx @ grid.strides


def power_distance(space, m: int, x, y) -> float:
    """Maximum metric on the m-th power."""
    if len(x) != m or len(y) != m:
        raise DomainError(f"tuples must have arity {m}")
    return max(space.distance(a, b) for a, b in zip(x, y))


@dataclass(frozen=True)
class PermGroup:
    """Subgroup of S_m, stored as the full list of its elements.

    Permutations are 0-based tuples ``s`` acting on an m-tuple ``x`` as
    ``x o s = (x[s[0]], ..., x[s[m-1]])``.
    """

    m: int
    elements: tuple = field(compare=False)
    _key: frozenset = field(init=False, repr=False, compare=True)

    def __post_init__(self):
        elems = tuple(tuple(int(i) for i in e) for e in self.elements)
        ident = tuple(range(self.m))
        for e in elems:
            if sorted(e) != list(ident):
                raise GroupError(f"{e} is not a permutation of {self.m} letters")
        es = set(elems)
        if ident not in es:
            raise GroupError("group does not contain the identity")
        for a in elems:
            if _inverse(a) not in es:
                raise GroupError(f"group not closed under inverse at {a}")
            for b in elems:
                if _compose(a, b) not in es:
                    raise GroupError(f"group not closed under composition at {a}, {b}")
        object.__setattr__(self, "elements", tuple(sorted(es)))
        object.__setattr__(self, "_key", frozenset(es))

    @classmethod
    def generated(cls, m: int, generators: Iterable = (), one_based: bool = False) -> "PermGroup":
        """Closure of the generators, capped at :data:`MAX_GROUP_ORDER` elements."""
        gens = []
        for g in generators:
            g = tuple(int(i) - (1 if one_based else 0) for i in g)
            if len(g) != m or sorted(g) != list(range(m)):
                base = 1 if one_based else 0
                raise GroupError(f"generator {list(generators)} is not a permutation of {base}..{m - 1 + base}")
            gens.append(g)
        ident = tuple(range(m))
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    c = _compose(a, g)
                    if c not in seen:
                        seen.add(c)
                        if len(seen) > MAX_GROUP_ORDER:
                            raise GroupError(f"group closure exceeds {MAX_GROUP_ORDER} elements")
                        nxt.append(c)
            frontier = nxt
        return cls(m, tuple(seen))

    @classmethod
    def trivial(cls, m: int) -> "PermGroup":
        return cls(m, (tuple(range(m)),))

    @classmethod
    def symmetric(cls, m: int) -> "PermGroup":
        if math.factorial(m) > MAX_GROUP_ORDER:
            raise GroupError(f"S_{m} exceeds {MAX_GROUP_ORDER} elements")
        return cls(m, tuple(itertools.permutations(range(m))))

    @classmethod
    def cyclic(cls, m: int) -> "PermGroup":
        return cls.generated(m, [tuple((i + 1) % m for i in range(m))] if m > 1 else [])

    @property
    def order(self) -> int:
        return len(self.elements)

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_full_symmetric(self) -> bool:
        return self.order == math.factorial(self.m)

    def issubgroup(self, other: "PermGroup") -> bool:
        return self.m == other.m and self._key <= other._key

    def as_array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64).reshape(self.order, self.m)


def _compose(a, b):
    # (x o a) o b  ==  x o (a[b[i]])
    return tuple(a[i] for i in b)


def _inverse(a):
    inv = [0] * len(a)
    for i, j in enumerate(a):
        inv[j] = i
    return tuple(inv)


def orbit_rep(G: PermGroup, x) -> tuple:
    """Lexicographically smallest tuple in the G-orbit of ``x``."""
    x = tuple(int(v) for v in x)
    if len(x) != G.m:
        raise DomainError(f"tuple arity {len(x)} does not match group arity {G.m}")
    if G.is_full_symmetric():
        return tuple(sorted(x))
    return min(tuple(x[i] for i in s) for s in G.elements)


def is_canonical(G: PermGroup, x) -> bool:
    return orbit_rep(G, x) == tuple(x)


@dataclass(frozen=True)
class SymPowerSpace:
    """The quotient X^m / G with the min-max metric."""

    base: object
    m: int
    group: PermGroup

    def __post_init__(self):
        if self.group.m != self.m:
            raise DomainError("group arity does not match m")

    def points(self):
        """Canonical orbit representatives, in increasing lexicographic order."""
        n = self.base.size
        if self.group.is_full_symmetric():
            return list(itertools.combinations_with_replacement(range(n), self.m))
        return [x for x in itertools.product(range(n), repeat=self.m) if is_canonical(self.group, x)]

    def rep(self, x) -> tuple:
        return orbit_rep(self.group, x)

    def distance(self, a, b) -> float:
        return sym_distance(self, a, b)


def sym_distance(sym: SymPowerSpace, a, b) -> float:
    """min over s in G of max_i d(a_i, b_{s(i)})."""
    if len(a) != sym.m or len(b) != sym.m:
        raise DomainError(f"orbits must have arity {sym.m}")
    d = sym.base.distance
    pair = [[d(a[i], b[j]) for j in range(sym.m)] for i in range(sym.m)]
    return min(max(pair[i][s[i]] for i in range(sym.m)) for s in sym.group.elements)


def project_HG(H: PermGroup, G: PermGroup, x) -> tuple:
    """Send an H-orbit to the G-orbit containing it."""
    if not H.issubgroup(G):
        raise GroupError("H is not a subgroup of G")
    return orbit_rep(G, x)


def hausdorff_arrays(a, b, metric: str = "chebyshev", chunk: int = 2048) -> float:
    """Hausdorff distance between two finite point clouds given as coordinate arrays."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DomainError("Hausdorff distance of an empty set")
    return max(_directed(a, b, metric, chunk), _directed(b, a, metric, chunk))


def _directed(a, b, metric, chunk):
    worst = 0.0
    for s in range(0, len(a), chunk):
        d = cdist(a[s:s + chunk], b, metric=metric).min(axis=1).max()
        worst = max(worst, float(d))
    return worst


def hausdorff(space, A, B) -> float:
    """Hausdorff distance between two nonempty point-index sets."""
    A = np.unique(np.asarray(list(A), dtype=np.int64))
    B = np.unique(np.asarray(list(B), dtype=np.int64))
    if A.size == 0 or B.size == 0:
        raise DomainError("Hausdorff distance of an empty set")
    for i in (A[0], A[-1], B[0], B[-1]):
        space._check(i)
    if isinstance(space, GridSpace):
        return hausdorff_arrays(space.coords[A], space.coords[B], space.metric)
    D = space.distance_matrix(A, B)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))
