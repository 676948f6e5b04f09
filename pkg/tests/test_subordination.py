import numpy as np
import pytest

from freeconv.complexfn import cauchy
from freeconv.errors import DomainError, IterationError
from freeconv.measures import Measure
from freeconv.subordination import (SolveOptions, g_free, g_free_grid, solve,
                                    solve_grid, weighted_sum_g)

from oracles import binomial_convolution_g


def test_single_measure_is_identity():
    mu = Measure.binomial(0.3)
    z = 0.4 + 0.8j
    sol = solve([mu], z)
    assert sol.G == pytest.approx(complex(cauchy(mu, np.array([z]))[0]))
    assert sol.Z[0] == pytest.approx(z)


def test_semicircle_halves_combine():
    """Two semicircles of variance 1/2 convolve to the unit semicircle."""
    halves = [Measure.semicircle(0.5), Measure.semicircle(0.5)]
    zs = np.linspace(-3, 3, 50) + 1j * np.linspace(0.05, 3, 50)
    G = g_free_grid(halves, zs)
    ref = cauchy(Measure.semicircle(1.0), zs)
    assert np.max(np.abs(G - ref)) < 1e-10


def test_bernoulli_pair_gives_arcsine_transform():
    from freeconv.complexfn import sqrt_cut
    b = Measure.bernoulli()
    zs = np.linspace(-4, 4, 80) + 0.3j
    G = g_free_grid([b, b], zs)
    assert np.max(np.abs(G - 1.0 / sqrt_cut(zs * zs - 4.0))) < 1e-10


@pytest.mark.parametrize("p,n", [(0.5, 2), (0.5, 8), (0.25, 4), (0.25, 16)])
def test_binomial_closed_form(p, n):
    mu = Measure.binomial(p).scale(1.0 / np.sqrt(n))
    zs = np.linspace(-3, 3, 60) + 1j
    G = g_free_grid([mu] * n, zs)
    assert np.max(np.abs(G - binomial_convolution_g(p, n, zs))) < 1e-10


def test_imaginary_parts_ordered():
    """Im Z_i >= Im z, Im F >= Im z, Im G < 0 for every converged solve."""
    rng = np.random.default_rng(21)
    ms = [Measure.bernoulli(), Measure.binomial(0.3), Measure.semicircle(0.5)]
    for _ in range(25):
        z = complex(rng.normal(), 0.05 + abs(rng.normal()))
        sol = solve(ms, z)
        assert all(w.imag >= z.imag - 1e-10 for w in sol.Z)
        assert sol.common_F.imag >= z.imag - 1e-10
        assert sol.G.imag < 0


def test_permutation_invariance():
    ms = [Measure.bernoulli(), Measure.binomial(0.2), Measure.semicircle(1.0)]
    z = -0.7 + 0.4j
    a = solve(ms, z)
    b = solve([ms[2], ms[0], ms[1]], z)
    assert a.G == pytest.approx(b.G, abs=1e-10)
    assert a.Z[0] == pytest.approx(b.Z[1], abs=1e-9)
    assert a.Z[1] == pytest.approx(b.Z[2], abs=1e-9)
    assert a.Z[2] == pytest.approx(b.Z[0], abs=1e-9)


def test_warm_start_matches_cold_start():
    ms = [Measure.bernoulli()] * 4
    z0, z1 = 0.5 + 0.3j, 0.55 + 0.3j
    cold = solve(ms, z1)
    warm = solve(ms, z1, init=solve(ms, z0).Z)
    assert warm.G == pytest.approx(cold.G, abs=1e-9)


def test_duplicate_collapse_matches_full_system():
    """The multiplicity-collapsed path must agree with an explicit solve
    forced through the general path via a warm start."""
    mu = Measure.binomial(0.25).scale(0.5)
    zs = np.array([0.3 + 0.5j, -1.2 + 0.2j])
    Zc, Fc, Gc, _, _, conv = solve_grid([mu] * 4, zs)
    init = np.tile(zs, (4, 1))
    Zf, Ff, Gf, _, _, conv2 = solve_grid([mu] * 4, zs, init=init)
    assert np.all(conv) and np.all(conv2)
    assert np.max(np.abs(Gc - Gf)) < 1e-9
    assert np.max(np.abs(Zc - Zf)) < 1e-9


def test_reciprocal_subordination_relation():
    """For the normalized weighted sum the solved Z_i obey
    F_i(Z_i) = F of the convolution and sum Z_i - z = (n-1) F."""
    rng = np.random.default_rng(22)
    th = rng.normal(size=8)
    th /= np.linalg.norm(th)
    ms = [Measure.bernoulli().scale(float(t)) for t in th]
    z = 0.9 + 0.6j
    sol = solve(ms, z)
    F = sol.common_F
    for i, m in enumerate(ms):
        Fi = 1.0 / complex(cauchy(m, np.array([sol.Z[i]]))[0])
        assert Fi == pytest.approx(F, abs=1e-9)
    assert sum(sol.Z) - z == pytest.approx((len(ms) - 1) * F, abs=1e-9)


def test_lower_half_plane_rejected():
    with pytest.raises(DomainError):
        solve([Measure.bernoulli()], 1.0 - 0.5j)
    with pytest.raises(DomainError):
        solve_grid([Measure.bernoulli()], [1.0 + 0.0j])


def test_empty_measure_list_rejected():
    with pytest.raises(DomainError):
        solve_grid([], [1j])


def test_iteration_failure_carries_residual():
    ms = [Measure.bernoulli()] * 16
    with pytest.raises(IterationError) as exc:
        solve(ms, 0.01 + 1e-7j, SolveOptions(tol=1e-15, max_iters=5))
    assert exc.value.residual > 0


def test_weighted_sum_g_uses_signed_weights():
    """Negative weights reflect the law; for an asymmetric base measure the
    result differs from using |theta|."""
    mu = Measure.binomial(0.2)
    th = np.array([0.8, -0.6])
    z = 0.5 + 1.0j
    g_signed = weighted_sum_g(mu, th, z)
    g_abs = weighted_sum_g(mu, np.abs(th), z)
    assert abs(g_signed - g_abs) > 1e-4


def test_solve_options_validation():
    with pytest.raises(DomainError):
        SolveOptions(tol=-1.0)
    with pytest.raises(DomainError):
        SolveOptions(damping=1.5)
