import numpy as np
import pytest

from starmeasure.errors import ConvergenceError, DomainError, ValidationError
from starmeasure.fixpoint import SolverConfig, residual, seed_measure, solve, uniqueness_probe
from starmeasure.gifs import AffineMap, GIFSystem, attractor_set
from starmeasure.measures import StarMeasure, distance, support
from starmeasure.spaces import GridSpace, PermGroup, hausdorff

from conftest import half_maps_system, sym2_line_system


def test_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(seed="random")
    with pytest.raises(DomainError):
        SolverConfig(mode="weakstar")
    with pytest.raises(DomainError):
        SolverConfig(epsilon=0.0)
    g = GridSpace([[0.0, 1.0]], [1025])
    assert SolverConfig().eps_for(g) == pytest.approx(1 / 1024 + 1 / 256)
    assert SolverConfig(epsilon=0.1).eps_for(g) == 0.1


def test_half_maps_exact_fixed_point(half_maps):
    mu, trace = solve(half_maps)
    assert trace.exact and trace.converged
    assert trace.final_residual == 0.0
    assert mu[0] == 1.0
    assert np.all(mu.values[1:] == 0.5)
    assert residual(half_maps, mu) == 0.0


@pytest.mark.parametrize("seed", ["attractor_support", "full", "dirac_corner"])
def test_half_maps_any_seed(seed):
    sys_ = half_maps_system(257)
    mu, trace = solve(sys_, SolverConfig(seed=seed))
    assert trace.converged
    # a corner Dirac never reaches x = 1 on the lattice (only x = 1 maps there),
    # so limits agree in the hypograph metric rather than pointwise
    ref = StarMeasure(sys_.space, np.r_[1.0, np.full(256, 0.5)])
    assert distance(mu, ref) <= sys_.space.cell()


def test_nesting_from_attractor_support(sym2_line):
    mu, trace = solve(sym2_line)
    cell = sym2_line.space.cell()
    assert trace.converged and not trace.exact
    assert max(trace.column("nesting_violation")) <= cell
    assert trace.column("support_size")[0] == sym2_line.space.size


def test_support_matches_attractor(sym2_line):
    mu, _ = solve(sym2_line)
    A = attractor_set(sym2_line)
    assert hausdorff(sym2_line.space, support(mu), A) <= 2 * sym2_line.space.cell()


def test_non_contractive_needs_force():
    space = GridSpace([[0.0, 1.0]], [17])
    ident = GIFSystem(space, 1, PermGroup.trivial(1), [AffineMap([[[1.0]]], [0.0])], [1.0])
    with pytest.raises(ValidationError):
        solve(ident)
    mu, trace = solve(ident, force=True)
    assert trace.warnings and trace.final_residual == 0.0


def test_max_iter_exhausted():
    sys_ = sym2_line_system(257)
    with pytest.raises(ConvergenceError) as err:
        solve(sys_, SolverConfig(max_iter=1, epsilon=1e-9))
    assert len(err.value.trace) == 1
    assert isinstance(err.value.measure, StarMeasure)


def test_trace_csv():
    _, trace = solve(half_maps_system(65))
    text = trace.to_csv(timings=False)
    lines = text.splitlines()
    assert lines[0] == "step,distance,sup_residual,support_size,nesting_violation,max_increase,wall_time"
    assert len(lines) == len(trace) + 1
    assert all(l.endswith(",0.0") for l in lines[1:])


def test_seed_measures(half_maps):
    assert seed_measure(half_maps, "dirac_corner")[0] == 1.0
    assert seed_measure(half_maps, "full").values.min() == 1.0
    with pytest.raises(DomainError):
        seed_measure(half_maps, "nope")


def test_uniqueness_probe_small():
    sys_ = sym2_line_system(129)
    cfg = SolverConfig()
    probe = uniqueness_probe(sys_, cfg, ["attractor_support", "full", "dirac_corner"])
    assert probe.within(cfg.eps_for(sys_.space))
    assert set(probe.limits) == {"attractor_support", "full", "dirac_corner"}
    with pytest.raises(DomainError):
        uniqueness_probe(sys_, cfg, ["full"])
