import numpy as np
import pytest

from scsf.errors import DimensionError
from scsf.spectral import (
    Grid,
    analyze,
    backward_difference,
    basis_matrix,
    divergence,
    eigenvalue,
    inner_H,
    laplacian,
    norm_E,
    norm_H,
    project,
    random_field,
    synthesize,
)

from conftest import band_limited, sine_field


def discrete_eig(k, m):
    h = 1.0 / (m + 1)
    return 4.0 / h**2 * np.sin(0.5 * k * np.pi * h) ** 2


@pytest.mark.parametrize("m", [7, 31, 63, 100])
def test_basis_is_discretely_orthonormal(m):
    B = basis_matrix(m, m)
    gram = B @ B.T / (m + 1)
    assert np.allclose(gram, np.eye(m), atol=1e-12)


@pytest.mark.parametrize("m", [63, 100])
def test_analyze_synthesize_roundtrip(m, rng):
    a = rng.standard_normal(m)
    assert np.allclose(analyze(synthesize(a, m), m), a, atol=1e-12)


def test_fast_and_direct_transforms_agree(rng):
    u = rng.standard_normal((3, 127))
    assert np.allclose(analyze(u, 40, fast=True), analyze(u, 40, fast=False), atol=1e-13)


def test_coefficients_of_sine_sum(rng):
    c = rng.standard_normal(5)
    u = sine_field(255, c)
    a = analyze(u, 8)
    assert np.allclose(a[:5], c, atol=1e-12)
    assert np.allclose(a[5:], 0, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 5, 17])
def test_laplacian_eigenpairs(k):
    m = 63
    e = sine_field(m, np.eye(k)[k - 1])
    assert np.allclose(laplacian(e), -discrete_eig(k, m) * e, atol=1e-8 * discrete_eig(k, m))
    assert norm_E(e) ** 2 == pytest.approx(discrete_eig(k, m), rel=1e-12)
    assert norm_H(e) == pytest.approx(1.0, rel=1e-12)


def test_eigenvalue_continuum():
    assert eigenvalue(3) == pytest.approx(9 * np.pi**2)


def test_summation_by_parts(rng):
    m = 50
    u = rng.standard_normal(m)
    g = rng.standard_normal(m + 1)
    # sum_i div(g)_i u_i h == -sum_j g_j (D^- u)_j h
    lhs = inner_H(divergence(g), u)
    rhs = -np.sum(g * backward_difference(u)) / (m + 1)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_backward_difference_shape_and_values():
    u = np.array([1.0, 3.0, 2.0])
    assert np.allclose(backward_difference(u), np.array([1.0, 2.0, -1.0, -2.0]) * 4)


def test_project_keeps_low_modes(rng):
    m = 64
    c = rng.standard_normal(10)
    u = sine_field(m, c)
    assert np.allclose(analyze(project(u, 4), 10), np.r_[c[:4], np.zeros(6)], atol=1e-12)
    assert np.allclose(project(u, m), u)


def test_grid_and_dimension_errors():
    g = Grid(9)
    assert g.h == pytest.approx(0.1)
    assert g.nodes[0] == pytest.approx(0.1) and g.nodes[-1] == pytest.approx(0.9)
    with pytest.raises(DimensionError):
        synthesize(np.ones(10), 9)
    with pytest.raises(DimensionError):
        analyze(np.ones(9), 10)


def test_batched_operations(rng):
    U = band_limited(rng, 31, size=4)
    assert norm_H(U).shape == (4,)
    assert np.allclose(norm_E(U), [norm_E(u) for u in U])


def test_random_field_band_limited():
    gen = np.random.default_rng(1)
    u = random_field(63, gen, n_modes=8, size=3)
    assert u.shape == (3, 63)
    assert np.allclose(analyze(u, 63)[:, 8:], 0, atol=1e-12)


def test_coefficients_of_named_modes():
    m = 255
    assert np.allclose(analyze(sine_field(m, [1.0]), 4), [1, 0, 0, 0], atol=1e-12)
    assert np.all(analyze(np.zeros(m), 4) == 0)
    u = sine_field(m, [0, 3.0, 0, 0, -1.0])
    assert np.allclose(analyze(u, 8), [0, 3, 0, 0, -1, 0, 0, 0], atol=1e-10)
    assert np.allclose(analyze(u, 8, fast=False), analyze(u, 8, fast=True), atol=1e-10)


def test_roundtrip_spec_sizes(rng):
    a = rng.standard_normal(32)
    assert np.max(np.abs(analyze(synthesize(a, 255), 32) - a)) < 1e-10
    x = Grid(255).nodes
    assert np.allclose(synthesize(np.eye(3)[0], 255), np.sqrt(2) * np.sin(np.pi * x))
    assert np.all(synthesize(np.zeros(3), 9) == 0)


def test_edge_slopes_closed_forms():
    m = 255
    g = Grid(m)
    mid = g.edges  # edge midpoints (i - 1/2) h, i = 1..m+1
    # difference quotient of x(1 - x) is exact at edge midpoints
    assert np.allclose(backward_difference(g.sample(lambda x: x * (1 - x))), 1 - 2 * mid, atol=1e-12)
    e1 = sine_field(m, [1.0])
    err = np.max(np.abs(backward_difference(e1) - np.sqrt(2) * np.pi * np.cos(np.pi * mid)))
    assert err < 5 * g.h**2 * np.pi**3
    assert norm_H(e1) == pytest.approx(1.0, abs=1e-12)
    assert norm_E(e1) == pytest.approx(np.pi, abs=np.pi**3 * g.h**2)
    assert norm_E(sine_field(m, [0, 0, 1.0])) == pytest.approx(3 * np.pi, abs=(3 * np.pi) ** 3 * g.h**2)
