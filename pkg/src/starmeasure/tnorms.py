"""Continuous triangular norms on [0, 1].

Only the three classical norms are provided (product, minimum and
Lukasiewicz).  They form a closed enumeration rather than a plug-in
interface so that lattice-exhaustive tests stay tractable; a new norm
would be added as another :class:`TNorm` member together with its kernel
code in ``_kernel.pyx`` / ``_kernel_py.py``.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DomainError

__all__ = ["TNorm", "AxiomReport", "eval_tnorm", "fold", "verify_axioms", "get_tnorm"]


class TNorm(enum.Enum):
    PRODUCT = "product"
    MINIMUM = "min"
    LUKASIEWICZ = "lukasiewicz"

    @property
    def code(self) -> int:
        # integer tag understood by the compiled kernels
        return _CODES[self]

    def __call__(self, a, b):
        return eval_tnorm(self, a, b)

    def raw(self, a, b):
        """Evaluate without domain checks; works elementwise on arrays."""
        if self is TNorm.PRODUCT:
            return a * b
        if self is TNorm.MINIMUM:
            return np.minimum(a, b) if _is_array(a, b) else min(a, b)
        s = a + b - 1.0
        return np.maximum(s, 0.0) if _is_array(a, b) else max(s, 0.0)

    def lattice_closed(self) -> bool:
        """Whether the norm maps every lattice {0, 1/q, ..., 1} into itself."""
        return self is not TNorm.PRODUCT


_CODES = {TNorm.PRODUCT: 0, TNorm.MINIMUM: 1, TNorm.LUKASIEWICZ: 2}

_ALIASES = {
    "product": TNorm.PRODUCT,
    "prod": TNorm.PRODUCT,
    "min": TNorm.MINIMUM,
    "minimum": TNorm.MINIMUM,
    "lukasiewicz": TNorm.LUKASIEWICZ,
}


def get_tnorm(name) -> TNorm:
    if isinstance(name, TNorm):
        return name
    try:
        return _ALIASES[str(name).lower()]
    except KeyError:
        raise DomainError(f"unknown t-norm {name!r}; expected one of product, min, lukasiewicz") from None


def _is_array(a, b) -> bool:
    return isinstance(a, np.ndarray) or isinstance(b, np.ndarray)


def _check_unit(x, what="value"):
    arr = np.asarray(x, dtype=float)
    if arr.size and (np.isnan(arr).any() or arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError(f"{what} outside [0, 1]: {x!r}")


def eval_tnorm(t: TNorm, a, b):
    """Evaluate ``a * b`` under the norm ``t``.

    Scalars give a float; arrays are evaluated elementwise.

    >>> eval_tnorm(TNorm.LUKASIEWICZ, 0.75, 0.5)
    0.25
    """
    t = get_tnorm(t)
    _check_unit(a)
    _check_unit(b)
    if _is_array(a, b):
        return t.raw(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(t.raw(float(a), float(b)))


def fold(t: TNorm, values) -> float:
    """Left fold of the norm over a nonempty sequence."""
    values = [float(v) for v in values]
    if not values:
        raise DomainError("fold of an empty list")
    _check_unit(values)
    t = get_tnorm(t)
    return float(reduce(t.raw, values))


@dataclass(frozen=True)
class AxiomReport:
    tnorm: TNorm
    samples: int
    commutativity: float
    associativity: float
    monotonicity: float
    unit: float

    @property
    def worst(self) -> float:
        return max(self.commutativity, self.associativity, self.monotonicity, self.unit)

    def passed(self, tol: float = 1e-12) -> bool:
        return self.worst <= tol


def _violations(t: TNorm, a, b, c, a2):
    """Maximum violation of each axiom over matched sample arrays.

    ``a2 >= a`` elementwise is required for the monotonicity column.
    """
    f = t.raw
    comm = np.abs(f(a, b) - f(b, a)).max()
    assoc = np.abs(f(f(a, b), c) - f(a, f(b, c))).max()
    mono = np.maximum(f(a, b) - f(a2, b), 0.0).max()
    unit = np.abs(f(a, np.ones_like(a)) - a).max()
    return float(comm), float(assoc), float(mono), float(unit)


def verify_axioms(t: TNorm, sample_count: int, seed: int, lattice: int | None = None) -> AxiomReport:
    """Check the t-norm axioms on deterministic pseudo-random triples.

    With ``lattice=q`` the samples are drawn from {0, 1/q, ..., 1}
    instead of the continuum.
    """
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    t = get_tnorm(t)
    rng = np.random.default_rng(seed)
    if lattice:
        draw = lambda: rng.integers(0, lattice + 1, sample_count) / lattice  # noqa: E731
    else:
        draw = lambda: rng.random(sample_count)  # noqa: E731
    a, b, c, d = draw(), draw(), draw(), draw()
    lo, hi = np.minimum(a, d), np.maximum(a, d)
    comm, assoc, mono, unit = _violations(t, lo, b, c, hi)
    return AxiomReport(t, sample_count, comm, assoc, mono, unit)


def verify_axioms_grid(t: TNorm, q: int = 64) -> AxiomReport:
    """Exhaustive check over every triple of the grid {0, 1/q, ..., 1}^3."""
    t = get_tnorm(t)
    g = np.arange(q + 1) / q
    a, b, c = (x.ravel() for x in np.meshgrid(g, g, g, indexing="ij"))
    f = t.raw
    comm = float(np.abs(f(a, b) - f(b, a)).max())
    assoc = float(np.abs(f(f(a, b), c) - f(a, f(b, c))).max())
    unit = float(np.abs(f(g, np.ones_like(g)) - g).max())
    # monotonicity in the first argument: consecutive grid values, all b
    x, y = np.meshgrid(g, g, indexing="ij")
    vals = f(x, y)
    mono = float(np.maximum(vals[:-1, :] - vals[1:, :], 0.0).max())
    return AxiomReport(t, (q + 1) ** 3, comm, assoc, mono, unit)


def lattice_closure_violations(t: TNorm, q: int) -> int:
    """Count pairs of L_q whose image falls off L_q (exact integer test)."""
    t = get_tnorm(t)
    bad = 0
    for i, j in itertools.product(range(q + 1), repeat=2):
        v = t.raw(i / q, j / q) * q
        if abs(v - round(v)) > 1e-9:
            bad += 1
    return bad
