import numpy as np
import pytest

from magstark.errors import (ConfigurationError, GapNotFoundError,
                             GeometryError, SpectralWindowError)
from magstark.grid import make_grid
from magstark.hamiltonian import FieldParams, assemble_h, assemble_h0, assemble_q
from magstark.potentials import PotentialSpec
from magstark.spectral import BumpFunction, eigendecompose, trace_function
from magstark.ssf import (TruncationSpec, epsilon_scaling,
                          resolvent_expansion_check, sigma_q_gap_window,
                          trace_identity_check, commutator_trace_zero,
                          truncation_convergence, wall_cutoff_weights,
                          xi_prime_mollified)

ZERO = PotentialSpec("zero")
GAUSS = PotentialSpec("gaussian", amplitude=0.5, width=2.0)
F = BumpFunction(2.0, 0.8)


class _ScaledBump:
    """c * f for the linearity checks; keeps the support attribute."""

    def __init__(self, f, c):
        self.f, self.c = f, c
        self.support = f.support

    def __call__(self, t):
        return self.c * self.f(t)


def test_zero_potential_identity_exact():
    g = make_grid(6, 6, 21, 21)
    rep = trace_identity_check(g, FieldParams(1.0, 0.5), ZERO, F)
    assert rep.lhs == 0.0 and rep.rhs == 0.0
    assert abs(rep.residual) <= 1e-12 * g.n_points


def test_linearity_in_f():
    g = make_grid(6, 6, 21, 21)
    rep1 = trace_identity_check(g, FieldParams(1.0, 0.5), GAUSS, F)
    rep2 = trace_identity_check(g, FieldParams(1.0, 0.5), GAUSS, _ScaledBump(F, 2.0))
    assert rep2.lhs == 2.0 * rep1.lhs
    assert rep2.rhs == 2.0 * rep1.rhs
    assert rep2.residual == 2.0 * rep1.residual


def test_requires_positive_eps():
    g = make_grid(6, 6, 21, 21)
    with pytest.raises(ConfigurationError, match="eps"):
        trace_identity_check(g, FieldParams(1.0, 0.0), GAUSS, F)


def test_window_check():
    g = make_grid(6, 6, 21, 21)  # h = 0.6, resolved window ~ 5.6
    with pytest.raises(SpectralWindowError, match="resolved"):
        trace_identity_check(g, FieldParams(1.0, 0.5), GAUSS, BumpFunction(9.0, 1.0))


def test_identity_with_wall_cutoff_reference():
    # frozen reference: l=6, nx=61, gaussian (0.5, 2.0), f(2.0, 0.8), collar 2;
    # the wall-localized traces agree to a few percent at this resolution
    g = make_grid(6, 6, 61, 61)
    rep = trace_identity_check(g, FieldParams(1.0, 0.5), GAUSS, F, wall_cutoff=2.0)
    assert abs(rep.lhs) > 0.05
    assert rep.relative_residual <= 0.2


def test_wall_cutoff_weights_shape():
    g = make_grid(6, 6, 41, 41)
    chi = wall_cutoff_weights(g, collar=2.0)
    xf, yf = g.meshes()
    bulk = (np.abs(xf) <= 3.5) & (np.abs(yf) <= 3.5)
    assert np.all(chi[bulk] == 1.0)
    wall = (np.abs(xf) >= 5.9) | (np.abs(yf) >= 5.9)
    assert np.max(chi[wall]) < 1e-10
    with pytest.raises(ConfigurationError, match="collar"):
        wall_cutoff_weights(g, collar=7.0)


def test_commutator_trace_zero():
    g = make_grid(6, 6, 21, 21)
    re, im = commutator_trace_zero(g, FieldParams(1.0, 0.5), GAUSS, F)
    h = assemble_h(g, FieldParams(1.0, 0.5), GAUSS)
    scale = 1e-10 * g.n_points * np.max(np.abs(h.mat))
    assert abs(re) <= scale and abs(im) <= scale


def test_truncation_compact_support_collapses():
    # potential supported inside the smallest radius: chi_R V = V exactly
    g = make_grid(12, 12, 33, 33)
    bump = PotentialSpec("compact_bump", amplitude=0.5, width=2.5)
    tab = truncation_convergence(g, FieldParams(1.0, 0.5), bump, F,
                                 TruncationSpec((3.0, 4.5, 6.0)))
    for _, c1, c2 in tab:
        assert c1 <= 1e-10 and c2 <= 1e-10


def test_truncation_zero_potential():
    g = make_grid(12, 12, 33, 33)
    tab = truncation_convergence(g, FieldParams(1.0, 0.5), ZERO, F,
                                 TruncationSpec((3.0, 4.5, 6.0)))
    for _, c1, c2 in tab:
        assert c1 == 0.0 and c2 == 0.0


def test_truncation_gaussian_monotone():
    g = make_grid(12, 12, 41, 41)
    tab = truncation_convergence(g, FieldParams(1.0, 0.5), GAUSS, F,
                                 TruncationSpec((3.0, 4.5, 6.0)))
    c1 = [row[1] for row in tab]
    c2 = [row[2] for row in tab]
    assert c1[0] > c1[1] > c1[2]
    assert c2[0] > c2[1] > c2[2]


def test_truncation_geometry_error():
    g = make_grid(8, 8, 21, 21)
    with pytest.raises(GeometryError, match="radius"):
        truncation_convergence(g, FieldParams(1.0, 0.5), GAUSS, F,
                               TruncationSpec((3.0, 6.0)))


def test_xi_prime_zero_potential():
    g = make_grid(6, 6, 21, 21)
    dec = eigendecompose(assemble_h0(g, FieldParams(1.0, 0.5)))
    lam = np.linspace(0, 3, 200)
    curve = xi_prime_mollified(dec, dec, lam, eta=0.1)
    assert np.max(np.abs(curve)) == 0.0


def test_xi_prime_total_integral_vanishes():
    g = make_grid(6, 6, 31, 31)
    fields = FieldParams(1.0, 0.5)
    decH = eigendecompose(assemble_h(g, fields, GAUSS))
    decH0 = eigendecompose(assemble_h0(g, fields))
    eta = 0.1
    lam = np.linspace(float(decH.eigenvalues[0]) - 8 * eta,
                      float(decH.eigenvalues[-1]) + 8 * eta, 60001)
    total = float(np.trapezoid(xi_prime_mollified(decH, decH0, lam, eta), lam))
    assert abs(total) <= 1e-8


def test_xi_prime_integral_approximates_trace_difference():
    # quadrature oracle at the reference configuration; the mollified pairing
    # reproduces the raw eigenvalue-sum lhs within the measured 15% at
    # eta = spacing/2
    g = make_grid(6, 6, 61, 61)
    fields = FieldParams(1.0, 0.5)
    decH = eigendecompose(assemble_h(g, fields, GAUSS))
    decH0 = eigendecompose(assemble_h0(g, fields))
    lam_win = decH.eigenvalues[(decH.eigenvalues > 1.2) & (decH.eigenvalues < 2.8)]
    eta = 0.5 * float(np.median(np.diff(lam_win)))
    lam = np.linspace(1.2 - 8 * eta, 2.8 + 8 * eta, 4001)
    curve = xi_prime_mollified(decH, decH0, lam, eta)
    integral = float(np.trapezoid(F(lam) * curve, lam))
    lhs = trace_function(decH, F) - trace_function(decH0, F)
    assert abs(integral - lhs) / abs(lhs) <= 0.15


def test_gap_window_first_landau_gap():
    g = make_grid(6, 6, 41, 41)
    decq = eigendecompose(assemble_q(g, FieldParams(1.0), ZERO))
    a, b = sigma_q_gap_window(decq, g, margin=0.4)
    assert a <= 1.6 and b >= 2.4
    with pytest.raises(GapNotFoundError, match="margin"):
        sigma_q_gap_window(decq, g, margin=1.2)


def test_gap_window_shrinks_with_attractive_potential():
    g = make_grid(6, 6, 41, 41)
    decq0 = eigendecompose(assemble_q(g, FieldParams(1.0), ZERO))
    a0, b0 = sigma_q_gap_window(decq0, g, margin=0.3)
    well = PotentialSpec("gaussian", amplitude=-0.5, width=2.0)
    decq = eigendecompose(assemble_q(g, FieldParams(1.0), well))
    a1, b1 = sigma_q_gap_window(decq, g, margin=0.3)
    assert (b1 - a1) < (b0 - a0)


def test_epsilon_scaling_zero_potential_underflow():
    g = make_grid(6, 6, 21, 21)
    rep = epsilon_scaling(g, 1.0, ZERO, F, (0.4, 0.2, 0.1))
    assert rep.underflow and rep.slope is None


def test_epsilon_scaling_slope_invariant_under_f_rescale():
    g = make_grid(8, 2.4, 33, 9)
    spec = PotentialSpec("separable_power", amplitude=1.0, decay_n=3,
                         decay_delta=0.5)
    f = BumpFunction(2.0, 0.5)
    rep1 = epsilon_scaling(g, 1.0, spec, f, (0.4, 0.2, 0.1),
                           estimator="commutator")
    rep2 = epsilon_scaling(g, 1.0, spec, _ScaledBump(f, 3.0), (0.4, 0.2, 0.1),
                           estimator="commutator")
    assert np.isclose(rep1.slope, rep2.slope, rtol=1e-9)
    assert rep1.r2 == pytest.approx(rep2.r2, rel=1e-9)


def test_epsilon_scaling_validation():
    g = make_grid(6, 6, 21, 21)
    with pytest.raises(ConfigurationError, match="decreasing"):
        epsilon_scaling(g, 1.0, GAUSS, F, (0.1, 0.2))
    with pytest.raises(ConfigurationError, match="estimator"):
        epsilon_scaling(g, 1.0, GAUSS, F, (0.2, 0.1), estimator="magic")


def test_resolvent_expansion_exact():
    g = make_grid(6, 6, 31, 31)
    spec = GAUSS
    q = assemble_q(g, FieldParams(1.0), spec)
    h = assemble_h(g, FieldParams(1.0, 0.3), spec)
    # n = 1 is the second resolvent identity
    assert resolvent_expansion_check(q, h, 0.3, 2.0 + 0.5j, 1) <= 1e-10
    for n in (2, 3):
        assert resolvent_expansion_check(q, h, 0.3, 2.0 + 0.5j, n) <= 1e-8


def test_resolvent_expansion_eps_zero():
    g = make_grid(6, 6, 21, 21)
    q = assemble_q(g, FieldParams(1.0), GAUSS)
    h = assemble_h(g, FieldParams(1.0, 0.0), GAUSS)
    assert resolvent_expansion_check(q, h, 0.0, 2.0 + 0.5j, 3) <= 1e-10
