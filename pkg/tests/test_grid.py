import math

import numpy as np
import pytest

from pointer_decoherence import (
    BoundaryContaminationError,
    ConfigurationError,
    ConvergenceError,
    MeasurementConfig,
    SelectionState,
    decoherence_factor,
    evolve_branch,
)
from pointer_decoherence.grid import (
    GridInfeasibleError,
    GridSpec,
    auto_grid,
    convergence_study,
    numeric_moments,
    numeric_overlap,
    oracle_overlap,
    propagate,
    propagate_all,
    read_snapshot,
    richardson,
    write_snapshot,
)
from pointer_decoherence.pointer import branch_cross_moment


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        GridSpec(-10, 10, 1000, 32)
    with pytest.raises(ConfigurationError):
        GridSpec(10, -10, 1024, 32)
    spec = GridSpec(np.float64(-8), 8, 1024, 32)
    assert type(spec.x_min) is float
    assert spec.x.size == 1024 and spec.dx == pytest.approx(16 / 1024)


def test_auto_grid_covers_paths_and_caps():
    cfg = MeasurementConfig(g=1.0, t=3.0)
    spec = auto_grid(cfg, [1.0, -1.0])
    assert spec.x_min < -4.5 and spec.x_max > 4.5
    assert spec.k_max > 3.0 + 6.0
    with pytest.raises(GridInfeasibleError):
        auto_grid(MeasurementConfig(g=50.0, t=20.0), [1.0, -1.0])


def test_free_spreading_width():
    cfg = MeasurementConfig(g=0.0, t=2.0)
    b = propagate(auto_grid(cfg, [1.0]), cfg, 1.0)
    x, dens = b.x, np.abs(b.psi) ** 2 * b.spec.dx
    width = math.sqrt(np.sum(x**2 * dens) - np.sum(x * dens) ** 2)
    assert width == pytest.approx(math.sqrt(2.0), rel=1e-6)


def test_center_and_kick_on_grid():
    cfg = MeasurementConfig(g=1.0, t=2.0)
    m = numeric_moments([propagate(auto_grid(cfg, [1.0]), cfg, 1.0)], SelectionState([1.0]))
    assert m.mean_x == pytest.approx(2.0, abs=1e-6)
    assert m.mean_p == pytest.approx(2.0, abs=1e-6)


def test_zero_time_is_identity():
    cfg = MeasurementConfig(g=1.0, t=0.0)
    spec = auto_grid(cfg, [1.0])
    b = propagate(spec, cfg, 1.0)
    np.testing.assert_allclose(b.psi, evolve_branch(cfg, 1.0)(spec.x), atol=1e-14)
    assert numeric_overlap(b, b) == pytest.approx(1.0, abs=1e-12)


def test_grid_wavefunction_matches_closed_form_up_to_global_phase():
    cfg = MeasurementConfig(g=0.8, t=1.5, m=1.3, sigma=0.9)
    spec = auto_grid(cfg, [1.0], n_steps=400)
    psi = propagate(spec, cfg, 1.0).psi
    exact = evolve_branch(cfg, 1.0)(spec.x)
    phase = np.vdot(exact, psi) / abs(np.vdot(exact, psi))
    # Strang splitting is exact for a linear potential apart from a global phase
    assert np.max(np.abs(psi - phase * exact)) < 1e-10
    assert abs(phase - 1) < 1e-4


@pytest.mark.parametrize("g, t", [(1.0, 1.0), (0.3, 4.0), (2.0, 0.5)])
def test_decoherence_factor_on_grid(g, t):
    cfg = MeasurementConfig(g=g, t=t)
    assert abs(oracle_overlap(cfg, 1.0, -1.0)) == pytest.approx(decoherence_factor(cfg, 1.0, -1.0), abs=1e-6)


def test_oracle_overlap_phase_matches_closed_form():
    cfg = MeasurementConfig(g=0.6, t=1.7, m=0.9, sigma=1.1)
    exact = branch_cross_moment(evolve_branch(cfg, 0.8), evolve_branch(cfg, -0.3))
    assert abs(oracle_overlap(cfg, 0.8, -0.3) - exact) < 1e-8


def test_norm_and_energy_conservation():
    cfg = MeasurementConfig(g=1.2, t=3.0, m=0.8, sigma=1.0)
    b = propagate(auto_grid(cfg, [1.0, -1.0]), cfg, -1.0)
    norms, energies = np.array(b.norm_history), np.array(b.energy_history)
    assert np.max(np.abs(norms - norms[0])) < 1e-10
    assert np.max(np.abs(energies - energies[0])) / abs(energies[0]) < 1e-8


def test_small_grid_is_refused():
    cfg = MeasurementConfig(g=1.0, t=4.0)
    with pytest.raises(BoundaryContaminationError):
        propagate(GridSpec(-10, 10, 1024, 64), cfg, 1.0)
    with pytest.raises(BoundaryContaminationError):
        propagate(GridSpec(-80, 80, 256, 64), cfg, 1.0)


def test_branches_on_different_grids_refused():
    cfg = MeasurementConfig(g=1.0, t=1.0)
    b1 = propagate(GridSpec(-30, 30, 1024, 32), cfg, 1.0)
    b2 = propagate(GridSpec(-30, 30, 2048, 32), cfg, -1.0)
    with pytest.raises(ConfigurationError):
        numeric_overlap(b1, b2)


def test_richardson_removes_quadratic_error():
    exact = 1.5
    f = lambda h: exact + 0.3 * h**2
    assert richardson(f(0.1), f(0.05)) == pytest.approx(exact, abs=1e-14)


def test_time_ladder_is_second_order():
    cfg = MeasurementConfig(g=1.0, t=2.0)
    base = auto_grid(cfg, [1.0, 0.0])
    ladder = [base.with_steps(n) for n in (16, 32, 64, 128)]
    rep = convergence_study(ladder, cfg, [1.0, 0.0])
    assert rep.kind == "time" and rep.accepted
    measured = [o for o in rep.orders if o is not None]
    assert measured and all(abs(o - 2.0) < 0.25 for o in measured)
    exact = branch_cross_moment(evolve_branch(cfg, 0.0), evolve_branch(cfg, 1.0))
    x = base.x
    initial = evolve_branch(MeasurementConfig(1.0, 0.0), 0.0)(x)
    auto = np.vdot(initial, evolve_branch(cfg, 1.0)(x)) * base.dx
    assert abs(rep.value("auto[1]") - auto) < 1e-6
    assert abs(rep.value("overlap[1,0]") - np.conj(exact)) < 1e-8


def test_space_ladder_reaches_round_off():
    cfg = MeasurementConfig(g=1.0, t=1.0)
    ladder = [GridSpec(-40, 40, n, 64) for n in (512, 1024, 2048)]
    rep = convergence_study(ladder, cfg, [1.0, -1.0])
    assert rep.kind == "space"
    assert rep.differences[-1] < 1e-12


def test_ladder_validation():
    cfg = MeasurementConfig(g=1.0, t=1.0)
    s = GridSpec(-40, 40, 1024, 32)
    with pytest.raises(ConfigurationError):
        convergence_study([s, s.with_steps(64)], cfg, [1.0, -1.0])
    with pytest.raises(ConfigurationError):
        convergence_study([s, s.with_steps(64), s.with_points(2048)], cfg, [1.0, -1.0])
    with pytest.raises(ConfigurationError):
        convergence_study([s, s.with_steps(16), s.with_steps(8)], cfg, [1.0, -1.0])


def test_non_monotone_ladder_flagged(monkeypatch):
    import pointer_decoherence.grid as grid

    errors = iter([1e-3, 1e-4, 5e-4, 1e-5])
    monkeypatch.setattr(grid, "_ladder_quantities", lambda spec, cfg, eig: (["q"], np.array([next(errors)])))
    cfg = MeasurementConfig(g=1.0, t=1.0)
    ladder = [GridSpec(-40, 40, 1024, n) for n in (16, 32, 64, 128)]
    rep = convergence_study(ladder, cfg, [1.0, -1.0], strict=False)
    assert not rep.accepted and "non-monotone" in rep.note
    errors = iter([1e-3, 1e-4, 5e-4, 1e-5])
    with pytest.raises(ConvergenceError):
        convergence_study(ladder, cfg, [1.0, -1.0])


def test_snapshot_round_trip(tmp_path):
    cfg = MeasurementConfig(g=0.5, t=1.0, m=1.5, sigma=0.8)
    spec = auto_grid(cfg, [1.0, -0.5])
    bs = propagate_all(spec, cfg, [1.0, -0.5])
    path = tmp_path / "snap.bin"
    write_snapshot(path, bs)
    back = read_snapshot(path)
    assert [b.eigenvalue for b in back] == [1.0, -0.5]
    assert back[0].spec == spec and back[0].cfg == cfg
    for b, c in zip(bs, back):
        np.testing.assert_array_equal(b.psi, c.psi)
    raw = path.read_bytes()
    header_len = raw.index(b"\n") + 1
    assert len(raw) - header_len == spec.n_points * 4 * 8
