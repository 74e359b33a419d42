"""Exact finite laboratory for the hypograph monad.

Everything here works on tiny spaces with exact levels: integers ``k``
standing for ``k/q`` under the minimum and Lukasiewicz norms (both map the
lattice {0, 1/q, ..., 1} into itself), or :class:`~fractions.Fraction`
values for product-norm spot checks.  The constructions follow the set
formulas literally (unit, flattening, tensor via pushforward and
flattening) and serve as ground truth for the fast pointwise engine.

Hard size caps keep every exhaustive family small:

* tensor: at most 4 points per factor, q <= 4;
* monad laws / isomorphism: |X| <= 3, q <= 4;
* projection compatibility: |X| <= 3, m <= 3.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, GroupError, SizeCapError
from .measures import Hypograph, StarMeasure, evaluate, sym_tensor_value
from .spaces import FiniteSpace, PermGroup, orbit_rep
from .tnorms import TNorm, get_tnorm

__all__ = [
    "LevelAlgebra",
    "QuantizedMeasure",
    "OracleReport",
    "zeta_bar",
    "eta_bar",
    "monadic_tensor",
    "pointwise_tensor",
    "check_tensor",
    "check_monad_laws",
    "check_isomorphism",
    "check_projection_compat",
    "run_suite",
    "SUITES",
]

MAX_TENSOR_POINTS = 4
MAX_LAW_POINTS = 3
MAX_Q = 4
MAX_ARITY = 3


@dataclass(frozen=True)
class LevelAlgebra:
    """Exact level arithmetic for one t-norm.

    ``q`` set: levels are ints 0..q.  ``q`` None: levels are Fractions and
    ``base`` lists the starting lattice values.
    """

    tnorm: TNorm
    q: int | None
    base: tuple = ()

    @classmethod
    def lattice(cls, t, q: int) -> "LevelAlgebra":
        t = get_tnorm(t)
        if not t.lattice_closed():
            raise DomainError(f"{t.value} does not preserve the level lattice; use LevelAlgebra.rational")
        return cls(t, q)

    @classmethod
    def rational(cls, t, q: int) -> "LevelAlgebra":
        return cls(get_tnorm(t), None, tuple(Fraction(k, q) for k in range(q + 1)))

    @property
    def one(self):
        return self.q if self.q is not None else Fraction(1)

    @property
    def zero(self):
        return 0 if self.q is not None else Fraction(0)

    def levels(self) -> tuple:
        return tuple(range(self.q + 1)) if self.q is not None else self.base

    def op(self, a, b):
        t = self.tnorm
        if t is TNorm.MINIMUM:
            return a if a < b else b
        if t is TNorm.LUKASIEWICZ:
            s = a + b - self.one
            return s if s > 0 else self.zero
        return a * b

    def to_float(self, a) -> float:
        return a / self.q if self.q is not None else float(a)


def _saturate(points, pairs, alg: LevelAlgebra) -> Hypograph:
    """Add X x {0} and close downward over the admissible levels."""
    pairs = set(pairs)
    levels = sorted(set(alg.levels()) | {k for _, k in pairs})
    for x in points:
        pairs.add((x, alg.zero))
    closed = set()
    for x, k in pairs:
        for s in levels:
            if s > k:
                break
            closed.add((x, s))
    return Hypograph(tuple(points), alg.q, frozenset(closed), tuple(levels))


def hypograph_of(points, tops, alg: LevelAlgebra) -> Hypograph:
    """s_X: the hypograph of the level function ``tops`` (dict or sequence)."""
    if not isinstance(tops, dict):
        tops = dict(zip(points, tops))
    return _saturate(points, [(x, tops[x]) for x in points], alg)


def eta_bar(points, x, alg: LevelAlgebra) -> Hypograph:
    """Dirac hypograph (X x {0}) u ({x} x I)."""
    return hypograph_of(points, {p: (alg.one if p == x else alg.zero) for p in points}, alg)


def pushforward_hyp(H: Hypograph, f, codomain, alg: LevelAlgebra) -> Hypograph:
    """Image of (f x id)(H) together with Y x {0}."""
    return _saturate(codomain, [(f(x), k) for x, k in H.pairs], alg)


@lru_cache(maxsize=None)
def zeta_bar(meta: Hypograph, alg: LevelAlgebra) -> Hypograph:
    """Flattening: {(x, r * s) : (x, r) in A, (A, s) in meta}, saturated, with X x {0}."""
    points = []
    seen = set()
    for A in meta.points:
        for x in A.points:
            if x not in seen:
                seen.add(x)
                points.append(x)
    pairs = set()
    for A, s in meta.pairs:
        for x, r in A.pairs:
            pairs.add((x, alg.op(r, s)))
    return _saturate(points, pairs, alg)


def same_hypograph(A: Hypograph, B: Hypograph) -> bool:
    return set(A.points) == set(B.points) and A.pairs == B.pairs


@dataclass(frozen=True)
class QuantizedMeasure:
    """Normal level function on a tiny space; values are exact levels."""

    points: tuple
    values: tuple
    alg: LevelAlgebra

    def __post_init__(self):
        if len(self.points) != len(self.values):
            raise DomainError("points and values differ in length")
        if max(self.values) != self.alg.one:
            raise DomainError("quantized measure is not normal")

    def hyp(self) -> Hypograph:
        return hypograph_of(self.points, self.values, self.alg)

    def as_dict(self) -> dict:
        return dict(zip(self.points, self.values))

    def to_star(self, space) -> StarMeasure:
        return StarMeasure(space, [self.alg.to_float(v) for v in self.values])

    @classmethod
    def from_hypograph(cls, H: Hypograph, alg: LevelAlgebra) -> "QuantizedMeasure":
        tops = H.top()
        return cls(H.points, tuple(tops[x] for x in H.points), alg)


def normal_functions(n: int, alg: LevelAlgebra):
    """All level functions on n points attaining the top level."""
    levels = alg.levels()
    for vals in itertools.product(levels, repeat=n):
        if max(vals) == alg.one:
            yield vals


def monadic_tensor(mu: QuantizedMeasure, nu: QuantizedMeasure) -> QuantizedMeasure:
    """mu (x) nu built from the monad: flatten the image of mu under x -> f_x(nu)."""
    if len(mu.points) > MAX_TENSOR_POINTS or len(nu.points) > MAX_TENSOR_POINTS:
        raise SizeCapError(f"tensor oracle is capped at {MAX_TENSOR_POINTS} points per factor")
    alg = mu.alg
    XY = tuple((x, y) for x in mu.points for y in nu.points)
    nu_bar = nu.hyp()

    def g(x):
        # the image of nu under f_x: y -> (x, y)
        return pushforward_hyp(nu_bar, lambda y: (x, y), XY, alg)

    images = {x: g(x) for x in mu.points}
    meta_points = tuple(dict.fromkeys(images[x] for x in mu.points))
    meta = pushforward_hyp(mu.hyp(), lambda x: images[x], meta_points, alg)
    return QuantizedMeasure.from_hypograph(zeta_bar(meta, alg), alg)


def pointwise_tensor(mu: QuantizedMeasure, nu: QuantizedMeasure) -> QuantizedMeasure:
    """The closed form: value u(x) * v(y) at (x, y)."""
    alg = mu.alg
    pts = tuple((x, y) for x in mu.points for y in nu.points)
    vals = tuple(alg.op(a, b) for a in mu.values for b in nu.values)
    return QuantizedMeasure(pts, vals, alg)


@dataclass
class OracleReport:
    name: str
    instances: int = 0
    violations: int = 0
    params: dict = field(default_factory=dict)
    examples: list = field(default_factory=list)

    def record(self, ok: bool, what=None):
        self.instances += 1
        if not ok:
            self.violations += 1
            if len(self.examples) < 5:
                self.examples.append(repr(what))

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "instances": self.instances,
            "violations": self.violations,
            "params": self.params,
            "examples": self.examples,
        }


def _alg_for(t, q, exact_product=False):
    t = get_tnorm(t)
    if t.lattice_closed():
        return LevelAlgebra.lattice(t, q)
    if exact_product:
        return LevelAlgebra.rational(t, q)
    raise DomainError("product norm is only supported through rational spot checks")


def check_tensor(max_points: int, q: int, t) -> OracleReport:
    """monadic_tensor == pointwise formula for every pair of normal measures.

    Covers every pair of factor sizes 1..max_points.  The product norm runs
    in exact rationals and is meant for 1-2 point spaces.
    """
    if max_points > MAX_TENSOR_POINTS or q > MAX_Q:
        raise SizeCapError("tensor family exceeds the size caps")
    alg = _alg_for(t, q, exact_product=True)
    rep = OracleReport("tensor", params={"max_points": max_points, "q": q, "tnorm": alg.tnorm.value})
    for nx, ny in itertools.product(range(1, max_points + 1), repeat=2):
        X, Y = tuple(range(nx)), tuple(f"y{j}" for j in range(ny))
        for u in normal_functions(nx, alg):
            mu = QuantizedMeasure(X, u, alg)
            for v in normal_functions(ny, alg):
                nu = QuantizedMeasure(Y, v, alg)
                a, b = monadic_tensor(mu, nu), pointwise_tensor(mu, nu)
                rep.record(a.as_dict() == b.as_dict(), (u, v))
    return rep


def _all_hyps(points, alg):
    return [hypograph_of(points, vals, alg) for vals in normal_functions(len(points), alg)]


def _all_metas(hyps, alg, max_support=None):
    """Normal level assignments on ``hyps`` (optionally with bounded support)."""
    levels = alg.levels()
    pos = [lv for lv in levels if lv != alg.zero]
    k = len(hyps) if max_support is None else max_support
    out = []
    for size in range(1, k + 1):
        for combo in itertools.combinations(range(len(hyps)), size):
            for vals in itertools.product(pos, repeat=size):
                if max(vals) != alg.one:
                    continue
                pts = tuple(hyps[i] for i in combo)
                out.append(hypograph_of(pts, vals, alg))
    return out


def check_monad_laws(n_points: int, q: int, t, meta_support: int | None = None,
                     top_support: int = 2) -> OracleReport:
    """Unit laws and associativity of flattening, by exhaustive enumeration.

    Second-level elements range over every normal assignment on the
    hypographs of X (or those with at most ``meta_support`` hypographs);
    third-level elements over assignments supported on at most
    ``top_support`` second-level elements.
    """
    if n_points > MAX_LAW_POINTS or q > MAX_Q:
        raise SizeCapError("monad-law family exceeds the size caps")
    alg = _alg_for(t, q)
    X = tuple(range(n_points))
    hyps = _all_hyps(X, alg)
    if meta_support is None and (q + 1) ** len(hyps) > 50_000:
        meta_support = 2
    rep = OracleReport("laws", params={"points": n_points, "q": q, "tnorm": alg.tnorm.value,
                                       "meta_support": meta_support, "top_support": top_support})
    for A in hyps:
        # left unit: flatten(unit(A)) == A
        unit_A = eta_bar((A,), A, alg)
        rep.record(same_hypograph(zeta_bar(unit_A, alg), A), ("left", A.top()))
        # right unit: flatten(M(unit)(A)) == A
        etas = {x: eta_bar(X, x, alg) for x in X}
        lifted = pushforward_hyp(A, lambda x: etas[x], tuple(etas[x] for x in X), alg)
        rep.record(same_hypograph(zeta_bar(lifted, alg), A), ("right", A.top()))
    metas = _all_metas(hyps, alg, meta_support)
    rep.params["second_level"] = len(metas)
    for top in _all_metas(metas, alg, top_support):
        # flatten o M(flatten)  vs  flatten o flatten_{M X}
        flat_inner = {M: zeta_bar(M, alg) for M in top.points}
        left = zeta_bar(
            pushforward_hyp(top, lambda M: flat_inner[M], tuple(dict.fromkeys(flat_inner.values())), alg), alg
        )
        right = zeta_bar(zeta_bar(top, alg), alg)
        rep.record(same_hypograph(left, right), "assoc")
    return rep


def _h_star(A: Hypograph, phi: dict, alg: LevelAlgebra):
    return max(alg.op(phi[x], k) for x, k in A.pairs)


def check_isomorphism(n_points: int, q: int, t) -> OracleReport:
    """Union/join and scaling identities of h*, s_X round trip, and the engine anchor."""
    if n_points > MAX_LAW_POINTS or q > MAX_Q:
        raise SizeCapError("isomorphism family exceeds the size caps")
    alg = _alg_for(t, q)
    X = tuple(range(n_points))
    space = FiniteSpace(np.ones((n_points, n_points)) - np.eye(n_points))
    rep = OracleReport("iso", params={"points": n_points, "q": q, "tnorm": alg.tnorm.value})
    hyps = _all_hyps(X, alg)
    phis = [dict(zip(X, vals)) for vals in itertools.product(alg.levels(), repeat=n_points)]
    for vals in normal_functions(n_points, alg):
        H = hypograph_of(X, vals, alg)
        # s_X round trip and the hypograph conditions
        back = QuantizedMeasure.from_hypograph(H, alg).values
        rep.record(back == tuple(vals) and H.is_valid(), ("roundtrip", vals))
        mu = StarMeasure(space, [alg.to_float(v) for v in vals])
        for phi in phis:
            lhs = alg.to_float(_h_star(H, phi, alg))
            rhs = evaluate(mu, [alg.to_float(phi[x]) for x in X], alg.tnorm)
            rep.record(abs(lhs - rhs) <= 1e-12, ("engine", vals, phi))
    for A, B in itertools.product(hyps, repeat=2):
        U = Hypograph(X, alg.q, A.pairs | B.pairs, A.levels)
        for phi in phis:
            rep.record(_h_star(U, phi, alg) == max(_h_star(A, phi, alg), _h_star(B, phi, alg)), ("union", phi))
    for A in hyps:
        for s in alg.levels():
            scaled = Hypograph(X, alg.q, frozenset((x, alg.op(k, s)) for x, k in A.pairs), A.levels)
            for phi in phis:
                rep.record(_h_star(scaled, phi, alg) == alg.op(s, _h_star(A, phi, alg)), ("scale", s, phi))
    return rep


def _flatten(p):
    if isinstance(p, tuple):
        out = ()
        for c in p:
            out += _flatten(c)
        return out
    return (p,)


def _tensor_power(mu: QuantizedMeasure, m: int) -> QuantizedMeasure:
    acc = mu
    for _ in range(m - 1):
        acc = monadic_tensor(acc, mu)
    pts = tuple(_flatten(p) if m > 1 else (p,) for p in acc.points)
    return QuantizedMeasure(pts, acc.values, acc.alg)


def _push_measure(mu: QuantizedMeasure, f) -> QuantizedMeasure:
    pts = tuple(dict.fromkeys(f(x) for x in mu.points))
    H = pushforward_hyp(mu.hyp(), f, pts, mu.alg)
    return QuantizedMeasure.from_hypograph(H, mu.alg)


def check_projection_compat(n_points: int, m: int, H: PermGroup, G: PermGroup, q: int, t) -> OracleReport:
    """M(pi_HG)([mu x..x mu]_H) == [mu x..x mu]_G for every quantized mu.

    Also anchors the engine: the G-symmetrized value at each orbit equals
    the folded t-norm value used by the fused kernel.
    """
    if n_points > MAX_LAW_POINTS or m > MAX_ARITY:
        raise SizeCapError("projection family exceeds the size caps")
    if not H.issubgroup(G):
        raise GroupError("H is not a subgroup of G")
    if H.m != m or G.m != m:
        raise GroupError("group arity does not match m")
    alg = _alg_for(t, q)
    X = tuple(range(n_points))
    space = FiniteSpace(np.ones((n_points, n_points)) - np.eye(n_points))
    rep = OracleReport("projection", params={"points": n_points, "m": m, "q": q, "tnorm": alg.tnorm.value,
                                             "H_order": H.order, "G_order": G.order})
    for vals in normal_functions(n_points, alg):
        mu = QuantizedMeasure(X, vals, alg)
        T = _tensor_power(mu, m)
        via_H = _push_measure(_push_measure(T, lambda x: orbit_rep(H, x)), lambda x: orbit_rep(G, x))
        direct = _push_measure(T, lambda x: orbit_rep(G, x))
        rep.record(via_H.as_dict() == direct.as_dict(), ("compat", vals))
        star = mu.to_star(space)
        for orbit, level in direct.as_dict().items():
            rep.record(abs(sym_tensor_value(star, alg.tnorm, orbit) - alg.to_float(level)) <= 1e-12,
                       ("engine", vals, orbit))
    return rep


SUITES = ("laws", "iso", "tensor", "projection", "all")


def run_suite(name: str) -> list[OracleReport]:
    """The standard oracle families used by the CLI and the acceptance tests."""
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}")
    reports = []
    lattice = (TNorm.MINIMUM, TNorm.LUKASIEWICZ)
    if name in ("tensor", "all"):
        for t in lattice:
            reports.append(check_tensor(3, 2, t))
        reports.append(check_tensor(2, 2, TNorm.PRODUCT))
    if name in ("laws", "all"):
        for t in lattice:
            reports.append(check_monad_laws(2, 2, t))
    if name in ("iso", "all"):
        for t in lattice:
            reports.append(check_isomorphism(2, 2, t))
    if name in ("projection", "all"):
        for t in lattice:
            reports.append(check_projection_compat(2, 2, PermGroup.trivial(2), PermGroup.symmetric(2), 2, t))
        reports.append(check_projection_compat(2, 3, PermGroup.trivial(3), PermGroup.symmetric(3), 1, TNorm.MINIMUM))
    return reports
