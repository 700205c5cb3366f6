"""Tests for lattices, wavefunctions, and lattice observables."""

import math

import numpy as np
import pytest

from dtqm import (
    WaveState,
    apply_gauge_phase,
    expect_p,
    expect_x,
    inner,
    make_gaussian,
    make_grid,
    make_grid_2d,
    momentum_matrix,
    norm,
    position_spread,
)

HBAR = 1.0


def grid128():
    return make_grid(128, -8.0, 0.125)


def test_make_grid_extent():
    g = grid128()
    assert g.extent[0] == 16.0
    assert g.axis_points(0)[-1] == 7.875
    g4 = make_grid(4, 0.0, 1.0)
    np.testing.assert_array_equal(g4.axis_points(0), [0.0, 1.0, 2.0, 3.0])
    assert g4.extent[0] == 4.0


def test_make_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        make_grid(3, 0.0, 1.0)
    with pytest.raises(ValueError):
        make_grid(8, 0.0, 0.0)
    with pytest.raises(ValueError):
        make_grid(8, 0.0, -0.5)


def test_make_grid_2d_row_major_order():
    g = make_grid_2d((4, 6), (0.0, 10.0), (1.0, 0.5))
    assert g.dimension == 2
    assert g.n_total == 24
    x1 = g.axis_points(0)
    x2 = g.axis_points(1)
    # flat index = j1 * n2 + j2
    np.testing.assert_array_equal(g.coordinates[1 * 6 + 3], [x1[1], x2[3]])
    assert g.weight == pytest.approx(0.5)


def test_wavestate_validates_shape_and_is_readonly():
    g = make_grid(8, 0.0, 1.0)
    with pytest.raises(ValueError):
        WaveState(g, np.ones(7))
    with pytest.raises(ValueError):
        WaveState(g, np.array([np.inf] + [0.0] * 7))
    psi = WaveState(g, np.ones(8))
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 2.0


def test_inner_normalized_state():
    g = grid128()
    psi = make_gaussian(g, 0.0, 0.0, 1.0, HBAR)
    assert abs(inner(psi, psi) - 1.0) < 1e-12


def test_inner_disjoint_supports():
    g = make_grid(16, 0.0, 1.0)
    a = np.zeros(16, dtype=complex)
    b = np.zeros(16, dtype=complex)
    a[:4] = 1.0
    b[8:] = 1.0 + 0.5j
    assert inner(WaveState(g, a), WaveState(g, b)) == 0.0


def test_inner_conjugate_symmetry():
    g = make_grid(32, -4.0, 0.25)
    rng = np.random.default_rng(11)
    a = WaveState(g, rng.normal(size=32) + 1j * rng.normal(size=32))
    b = WaveState(g, rng.normal(size=32) + 1j * rng.normal(size=32))
    assert inner(a, b) == pytest.approx(np.conj(inner(b, a)), abs=1e-15)


def test_inner_positive_definite():
    g = make_grid(32, -4.0, 0.25)
    rng = np.random.default_rng(7)
    for _ in range(20):
        amps = rng.normal(size=32) + 1j * rng.normal(size=32)
        value = inner(WaveState(g, amps), WaveState(g, amps))
        assert value.real > 0.0
        assert abs(value.imag) < 1e-15 * value.real


def test_inner_grid_mismatch():
    a = WaveState(make_grid(8, 0.0, 1.0), np.ones(8))
    b = WaveState(make_grid(8, 0.5, 1.0), np.ones(8))
    with pytest.raises(ValueError):
        inner(a, b)


def test_expect_x_symmetric_packet():
    g = grid128()
    psi = make_gaussian(g, 1.5, 0.0, 1.0, HBAR)
    assert expect_x(psi)[0] == pytest.approx(1.5, abs=1e-9)


def test_expect_x_uniform_state_gives_grid_midpoint():
    g = grid128()
    amps = np.full(128, 1.0 / math.sqrt(16.0), dtype=complex)
    psi = WaveState(g, amps)
    midpoint = float(np.mean(g.axis_points(0)))
    assert expect_x(psi)[0] == pytest.approx(midpoint, abs=1e-12)


def test_expect_x_offset_gaussian():
    g = grid128()
    psi = make_gaussian(g, -2.0, 0.0, 1.0, HBAR)
    # independent quadrature of the sampled density
    dens = np.abs(psi.amplitudes) ** 2
    oracle = float(np.sum(g.axis_points(0) * dens) * 0.125)
    assert expect_x(psi)[0] == pytest.approx(oracle, abs=1e-14)
    assert expect_x(psi)[0] == pytest.approx(-2.0, abs=1e-9)


def test_expect_x_rejects_unnormalized():
    g = grid128()
    psi = WaveState(g, np.full(128, 0.5, dtype=complex))
    with pytest.raises(ValueError):
        expect_x(psi)


def test_expect_p_real_state_is_zero():
    g = grid128()
    psi = make_gaussian(g, 0.5, 0.0, 1.0, HBAR)  # p0 = 0 gives a real profile
    assert abs(expect_p(psi, HBAR)[0]) < 1e-9


def test_expect_p_plane_wave_matches_difference_formula():
    # A lattice-commensurate plane wave is an exact eigenvector of the
    # central-difference operator with eigenvalue hbar sin(p dx / hbar) / dx.
    g = grid128()
    dx, length = 0.125, 16.0
    p0 = 2.0 * math.pi / length  # one Fourier mode, about 0.3927
    xs = g.axis_points(0)
    psi = WaveState(g, np.exp(1j * p0 * xs / HBAR) / math.sqrt(length))
    expected = HBAR * math.sin(p0 * dx / HBAR) / dx
    assert expect_p(psi, HBAR)[0] == pytest.approx(expected, abs=1e-12)
    # close to p0 itself for this resolution
    assert expect_p(psi, HBAR)[0] == pytest.approx(p0, abs=1e-3)


def test_expect_p_gaussian_packet():
    # Quadrature oracle: p0 * sinc(p0 dx / hbar) * exp(-dx^2 / (8 sigma^2)).
    g = make_grid(256, -8.0, 0.0625)
    dx = 0.0625
    alpha, p0 = 2.0, 1.0
    sigma = alpha * math.sqrt(HBAR / 2.0)
    psi = make_gaussian(g, 0.0, p0, alpha, HBAR)
    oracle = p0 * (math.sin(p0 * dx / HBAR) / (p0 * dx / HBAR)) * math.exp(-dx * dx / (8 * sigma * sigma))
    measured = expect_p(psi, HBAR)[0]
    assert measured == pytest.approx(oracle, abs=1e-6)
    assert measured == pytest.approx(p0, abs=1e-3)


def test_momentum_matrix_is_exactly_hermitian():
    g = grid128()
    p = momentum_matrix(g, HBAR)
    assert np.array_equal(p, p.conj().T)
    g2 = make_grid_2d(6, -1.0, 0.25)
    for axis in (0, 1):
        p2 = momentum_matrix(g2, HBAR, axis=axis)
        assert np.array_equal(p2, p2.conj().T)


def test_expect_p_matches_momentum_matrix():
    g = make_grid(64, -4.0, 0.125)
    psi = make_gaussian(g, 0.3, 0.7, 1.0, HBAR)
    p = momentum_matrix(g, HBAR)
    direct = (g.weight * np.vdot(psi.amplitudes, p @ psi.amplitudes))
    assert abs(direct.imag) < 1e-9
    assert expect_p(psi, HBAR)[0] == pytest.approx(direct.real, abs=1e-13)


def test_make_gaussian_norm():
    g = grid128()
    psi = make_gaussian(g, 0.0, 0.5, 1.0, HBAR)
    assert abs(norm(psi) - 1.0) < 1e-12
    assert psi.warnings == ()


def test_make_gaussian_position_variance():
    g = make_grid(256, -8.0, 0.0625)
    for alpha in (1.0, 1.5, 2.0):
        psi = make_gaussian(g, 0.0, 0.0, alpha, HBAR)
        expected = alpha * alpha * HBAR / 2.0
        variance = position_spread(psi)[0] ** 2
        assert variance == pytest.approx(expected, rel=0.01)


def test_make_gaussian_uncertainty_product():
    g = make_grid(256, -8.0, 0.0625)
    psi = make_gaussian(g, 0.0, 0.0, 1.0, HBAR)
    p = momentum_matrix(g, HBAR)
    p_psi = p @ psi.amplitudes
    p_sq = (g.weight * np.vdot(p_psi, p_psi)).real
    dp = math.sqrt(p_sq - expect_p(psi, HBAR)[0] ** 2)
    product = position_spread(psi)[0] * dp
    assert product == pytest.approx(HBAR / 2.0, rel=0.02)


def test_make_gaussian_width_warnings():
    g = grid128()
    narrow = make_gaussian(g, 0.0, 0.0, 0.2, HBAR)  # sigma = 0.14 < 2 dx
    assert any("below resolvable" in w for w in narrow.warnings)
    wide = make_gaussian(g, 0.0, 0.0, 4.0, HBAR)  # sigma = 2.8 > L / 8
    assert any("above boundary-safe" in w for w in wide.warnings)


def test_make_gaussian_2d():
    g = make_grid_2d(40, -6.0, 0.3)
    psi = make_gaussian(g, (0.5, -1.0), (0.0, 0.0), 1.0, HBAR)
    assert abs(norm(psi) - 1.0) < 1e-12
    np.testing.assert_allclose(expect_x(psi), [0.5, -1.0], atol=1e-9)


def test_expect_p_2d_matches_momentum_matrices():
    g = make_grid_2d((20, 24), (-4.0, -4.8), (0.4, 0.4))
    psi = make_gaussian(g, (0.3, -0.5), (0.6, -0.4), (2.0, 2.2), HBAR)
    pe = expect_p(psi, HBAR)
    for axis in range(2):
        p = momentum_matrix(g, HBAR, axis=axis)
        direct = (g.weight * np.vdot(psi.amplitudes, p @ psi.amplitudes)).real
        assert pe[axis] == pytest.approx(direct, abs=1e-13)
    np.testing.assert_allclose(pe, [0.6, -0.4], atol=1e-2)


def test_apply_gauge_phase_zero_is_identity():
    g = grid128()
    psi = make_gaussian(g, 0.0, 0.3, 1.0, HBAR)
    out = apply_gauge_phase(psi, lambda x: np.zeros_like(x), HBAR)
    np.testing.assert_array_equal(out.amplitudes, psi.amplitudes)


def test_apply_gauge_phase_preserves_density():
    g = grid128()
    psi = make_gaussian(g, 0.0, 0.3, 1.0, HBAR)
    rng = np.random.default_rng(3)
    field = rng.normal(size=128) * 5.0
    out = apply_gauge_phase(psi, field, HBAR)
    np.testing.assert_allclose(np.abs(out.amplitudes), np.abs(psi.amplitudes), rtol=1e-15)
    assert norm(out) == pytest.approx(norm(psi), abs=1e-15)


def test_apply_gauge_phase_shifts_momentum():
    # Linear phase k x multiplies by exp(-i k x / hbar), shifting momentum by -k.
    g = grid128()
    length = 16.0
    k = 2.0 * math.pi / length  # commensurate so the shifted state stays exact
    uniform = WaveState(g, np.full(128, 1.0 / math.sqrt(length), dtype=complex))
    assert expect_p(uniform, HBAR)[0] == pytest.approx(0.0, abs=1e-15)
    shifted = apply_gauge_phase(uniform, lambda x: k * x, HBAR)
    formula = -HBAR * math.sin(k * 0.125 / HBAR) / 0.125
    assert expect_p(shifted, HBAR)[0] == pytest.approx(formula, abs=1e-12)
    assert expect_p(shifted, HBAR)[0] == pytest.approx(-k, abs=1e-3)


def test_apply_gauge_phase_rejects_nonfinite():
    g = grid128()
    psi = make_gaussian(g, 0.0, 0.0, 1.0, HBAR)
    field = np.zeros(128)
    field[5] = np.inf
    with pytest.raises(ValueError):
        apply_gauge_phase(psi, field, HBAR)
