"""Idempotent *-measures stored as normal usc functions on a finite space.

On a finite space every function is upper semicontinuous, so a measure is
just a vector ``u`` of values in [0, 1] with ``max(u) == 1``.  Its
hypograph ``{(x, t) : t <= u(x)}`` is materialized only on demand (for the
hypograph distance and for invariant checks).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DomainError
from .spaces import GridSpace, snap
from .tnorms import TNorm, fold, get_tnorm

__all__ = [
    "WeightFunction",
    "StarMeasure",
    "TestFunction",
    "Hypograph",
    "dirac",
    "from_support",
    "evaluate",
    "join",
    "scale",
    "pushforward",
    "sym_tensor_value",
    "hypograph",
    "measure_from_hypograph",
    "quantize",
    "distance",
    "support",
    "weakstar_dictionary",
    "write_csv",
    "read_csv",
    "TAU_SUPP",
    "DEFAULT_Q",
    "verify_measure_axioms",
]

TAU_SUPP = 1e-30
DEFAULT_Q = 256
# slack when flooring u*q onto the level lattice
_Q_EPS = 1e-9


def _as_values(space, values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape[0] != space.size:
        raise DomainError(f"expected {space.size} values, got {arr.shape[0]}")
    if arr.size and (np.isnan(arr).any() or arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError("values outside [0, 1]")
    arr.setflags(write=False)
    return arr


class _PointFunction:
    __slots__ = ("space", "values")

    def __init__(self, space, values):
        self.space = space
        self.values = _as_values(space, values)

    def __getitem__(self, p):
        return float(self.values[self.space._check(p)])

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and self.space == other.space
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}(space={self.space!r}, max={self.values.max():.6g})"


class WeightFunction(_PointFunction):
    """[0, 1]-valued function; need not attain 1."""


class TestFunction(_PointFunction):
    """A test function phi: X -> [0, 1]."""

    __test__ = False  # keep pytest from collecting this class


class StarMeasure(WeightFunction):
    """Normal function u: X -> [0, 1], i.e. a *-measure on a finite space."""

    def __init__(self, space, values):
        super().__init__(space, values)
        if self.values.max() != 1.0:
            raise DomainError(f"measure is not normal: max value {self.values.max()!r} != 1")

    @classmethod
    def from_weights(cls, w: WeightFunction) -> "StarMeasure":
        return cls(w.space, w.values)


def _same_space(a, b):
    if a.space != b.space:
        raise DomainError("objects live on different spaces")


def dirac(space, x) -> StarMeasure:
    u = np.zeros(space.size)
    u[space._check(x)] = 1.0
    return StarMeasure(space, u)


def from_support(space, A) -> StarMeasure:
    """Indicator measure: 1 on ``A``, 0 elsewhere."""
    idx = [space._check(a) for a in A]
    if not idx:
        raise DomainError("support set is empty")
    u = np.zeros(space.size)
    u[idx] = 1.0
    return StarMeasure(space, u)


def support(w, floor: float = 0.0) -> np.ndarray:
    """Indices where the value exceeds ``floor``."""
    return np.flatnonzero(w.values > floor)


def evaluate(mu: WeightFunction, phi, t: TNorm) -> float:
    """The integral of ``phi`` against ``mu``: max over x of phi(x) * u(x)."""
    if not isinstance(phi, _PointFunction):
        phi = TestFunction(mu.space, phi)
    _same_space(mu, phi)
    t = get_tnorm(t)
    return float(t.raw(phi.values, mu.values).max())


def join(mu: WeightFunction, nu: WeightFunction):
    _same_space(mu, nu)
    vals = np.maximum(mu.values, nu.values)
    if isinstance(mu, StarMeasure) or isinstance(nu, StarMeasure):
        return StarMeasure(mu.space, vals)
    return WeightFunction(mu.space, vals)


def scale(alpha: float, mu: WeightFunction, t: TNorm):
    """Pointwise ``alpha * u``; the identity when ``alpha == 1``."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"scale factor {alpha!r} outside [0, 1]")
    if alpha == 1.0:
        return mu
    t = get_tnorm(t)
    return WeightFunction(mu.space, t.raw(np.full(mu.space.size, float(alpha)), mu.values))


def pushforward(f, w: WeightFunction, codomain, map_index=None) -> WeightFunction:
    """Image of ``w`` under ``f``: result(y) = max{w(x) : f(x) lands on y}.

    ``f`` takes a domain point index.  On a grid codomain it returns raw
    coordinates, which are snapped; on a finite codomain it returns a point
    index.  The max value is preserved, so measures map to measures.
    """
    out = np.zeros(codomain.size)
    for x in np.flatnonzero(w.values > 0):
        img = f(int(x))
        if isinstance(codomain, GridSpace):
            y = snap(codomain, img, map_index=map_index, source=(int(x),))
        else:
            y = codomain._check(img)
        if w.values[x] > out[y]:
            out[y] = w.values[x]
    if isinstance(w, StarMeasure):
        return StarMeasure(codomain, out)
    return WeightFunction(codomain, out)


def sym_tensor_value(mu: WeightFunction, t: TNorm, orbit) -> float:
    """Value of the G-symmetrized tensor power of ``mu`` at an orbit."""
    return fold(t, [mu.values[mu.space._check(x)] for x in orbit])


def quantize(values, q: int) -> np.ndarray:
    """Top lattice level floor(u * q) per point, as integers."""
    return np.floor(np.asarray(values, dtype=float) * q + _Q_EPS).astype(np.int64)


@dataclass(frozen=True)
class Hypograph:
    """A finite hypograph: a set of (point, level) pairs.

    With an integer ``q`` a level ``k`` stands for ``k / q``; with
    ``q=None`` the levels are exact :class:`~fractions.Fraction` values.
    ``levels`` lists the admissible levels that saturation refers to.
    """

    points: tuple
    q: int | None
    pairs: frozenset
    levels: tuple

    def __hash__(self):
        # hypographs nest inside hypographs in the oracle; hash once
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash((self.points, self.q, self.pairs, self.levels))
            object.__setattr__(self, "_hash", h)
            return h

    @property
    def one(self):
        return self.q if self.q is not None else Fraction(1)

    def level_value(self, k) -> float:
        return k / self.q if self.q is not None else float(k)

    def top(self) -> dict:
        tops = {x: self.levels[0] for x in self.points}
        for x, k in self.pairs:
            if k > tops[x]:
                tops[x] = k
        return tops

    def violations(self) -> list[str]:
        """Which of the three hypograph conditions fail (empty if none)."""
        bad = []
        if not any(k == self.one for _, k in self.pairs):
            bad.append("does not meet level 1")
        zero = self.levels[0]
        if any((x, zero) not in self.pairs for x in self.points):
            bad.append("does not contain X x {0}")
        for x, k in self.pairs:
            if any((x, s) not in self.pairs for s in self.levels if s <= k):
                bad.append(f"not saturated at {(x, k)}")
                break
        return bad

    def is_valid(self) -> bool:
        return not self.violations()


def lattice_levels(q: int) -> tuple:
    return tuple(range(q + 1))


def hypograph(mu: WeightFunction, q: int) -> Hypograph:
    """Lattice hypograph {(x, k/q) : k/q <= u(x)} (always contains X x {0})."""
    if q < 1:
        raise DomainError("q must be >= 1")
    tops = quantize(mu.values, q)
    pairs = frozenset((x, k) for x in range(mu.space.size) for k in range(int(tops[x]) + 1))
    return Hypograph(tuple(range(mu.space.size)), q, pairs, lattice_levels(q))


def measure_from_hypograph(space, H: Hypograph):
    """Inverse of :func:`hypograph`: read off the top level per point."""
    tops = H.top()
    vals = [H.level_value(tops[x]) for x in range(space.size)]
    if max(vals) == 1.0:
        return StarMeasure(space, vals)
    return WeightFunction(space, vals)


def _hypo_directed(space, uq: np.ndarray, vq: np.ndarray, q: int) -> float:
    """sup over hyp(u) of the distance to hyp(v), with the sup metric on X x I.

    Only the top of each fibre matters, and the nearest point of hyp(v) is
    either straight below on the same fibre or on a fibre where v > 0.
    """
    xs = np.flatnonzero(uq > 0)
    if xs.size == 0:
        return 0.0
    ys = np.flatnonzero(vq > 0)
    own = np.maximum(uq[xs] - vq[xs], 0) / q
    if ys.size == 0:
        return float(own.max())
    uvals = uq[xs] / q
    vvals = vq[ys] / q
    if isinstance(space, GridSpace):
        best = kernels.backend.hypo_directed(
            space.coords[xs], uvals, space.coords[ys], vvals, own, 1 if space.metric == "euclidean" else 0
        )
        return float(best)
    D = space.distance_matrix(xs, ys)
    lift = np.maximum(uvals[:, None] - vvals[None, :], 0.0)
    cand = np.maximum(D, lift).min(axis=1)
    return float(np.minimum(cand, own).max())


def distance(mu: WeightFunction, nu: WeightFunction, mode: str = "hypograph-hausdorff",
             q: int = DEFAULT_Q, dictionary=None, t: TNorm = TNorm.MINIMUM) -> float:
    """Distance between two measures on the same space.

    ``sup``: max |u - v|.  ``hypograph-hausdorff``: Hausdorff distance of the
    level-``q`` hypographs in X x [0, 1] with the sup metric.  ``weakstar``:
    max over a test-function dictionary of |mu(phi) - nu(phi)| under ``t``.
    """
    _same_space(mu, nu)
    if mode == "sup":
        return float(np.abs(mu.values - nu.values).max())
    if mode in ("hypograph-hausdorff", "hypograph", "hausdorff"):
        uq, vq = quantize(mu.values, q), quantize(nu.values, q)
        if np.array_equal(uq, vq):
            return 0.0
        return max(_hypo_directed(mu.space, uq, vq, q), _hypo_directed(mu.space, vq, uq, q))
    if mode == "weakstar":
        if dictionary is None or len(dictionary) == 0:
            raise DomainError("weakstar distance needs a nonempty test-function dictionary")
        return max(abs(evaluate(mu, phi, t) - evaluate(nu, phi, t)) for phi in dictionary)
    raise DomainError(f"unknown distance mode {mode!r}")


def weakstar_dictionary(space, seed: int = 0, n_random: int = 8, blocks: int = 8) -> list[TestFunction]:
    """Point indicators plus ``n_random`` random piecewise-constant fields."""
    funcs = []
    for x in range(space.size):
        v = np.zeros(space.size)
        v[x] = 1.0
        funcs.append(TestFunction(space, v))
    rng = np.random.default_rng(seed)
    nb = max(1, min(blocks, space.size))
    for _ in range(n_random):
        cuts = np.sort(rng.choice(np.arange(1, space.size), size=nb - 1, replace=False)) if nb > 1 else []
        levels = rng.random(nb)
        funcs.append(TestFunction(space, np.repeat(levels, np.diff(np.r_[0, cuts, space.size]))))
    return funcs


def write_csv(w: WeightFunction, path=None) -> str:
    """Serialize as ``point_index,value`` rows; values use shortest round-trip repr."""
    buf = io.StringIO()
    buf.write("point_index,value\n")
    for i, v in enumerate(w.values):
        buf.write(f"{i},{repr(float(v))}\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(space, source) -> WeightFunction:
    """Parse the CSV produced by :func:`write_csv` (path or text)."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    else:
        text = str(source)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["point_index", "value"]:
        raise DomainError("missing 'point_index,value' header")
    vals = np.zeros(space.size)
    seen = set()
    for r in rows[1:]:
        if not r:
            continue
        i = space._check(int(r[0]))
        if i in seen:
            raise DomainError(f"duplicate point index {i}")
        seen.add(i)
        vals[i] = float(r[1])
    if vals.max() == 1.0:
        return StarMeasure(space, vals)
    return WeightFunction(space, vals)


def verify_measure_axioms(t: TNorm, instances: int = 100, n_points: int = 4, q: int = DEFAULT_Q,
                           seed: int = 0) -> dict:
    """Worst deviation of each defining identity of a *-measure under ``evaluate``.

    Random measures, test functions and constants are drawn on the level
    lattice ``k / q`` so that minimum and Lukasiewicz are checked exactly.
    Keys: ``constant`` (mu(c) = c), ``homogeneity`` (mu(l * phi) = l * mu(phi))
    and ``maxitivity`` (mu(phi v psi) = mu(phi) v mu(psi)).
    """
    from .spaces import FiniteSpace

    t = get_tnorm(t)
    rng = np.random.default_rng(seed)
    space = FiniteSpace(np.ones((n_points, n_points)) - np.eye(n_points))
    worst = {"constant": 0.0, "homogeneity": 0.0, "maxitivity": 0.0}

    def lattice(size):
        return rng.integers(0, q + 1, size=size) / q

    for _ in range(instances):
        u = lattice(n_points)
        u[rng.integers(n_points)] = 1.0
        mu = StarMeasure(space, u)
        phi, psi = lattice(n_points), lattice(n_points)
        c, lam = lattice(()), float(lattice(()))
        worst["constant"] = max(worst["constant"], abs(evaluate(mu, np.full(n_points, c), t) - c))
        lhs = evaluate(mu, t.raw(np.full(n_points, lam), phi), t)
        rhs = float(t.raw(lam, evaluate(mu, phi, t)))
        worst["homogeneity"] = max(worst["homogeneity"], abs(lhs - rhs))
        lhs = evaluate(mu, np.maximum(phi, psi), t)
        rhs = max(evaluate(mu, phi, t), evaluate(mu, psi, t))
        worst["maxitivity"] = max(worst["maxitivity"], abs(lhs - rhs))
    return worst
