"""Commutator positivity, weighted-resolvent probes, embedded-eigenvalue scans.

The commutator entering the positivity bound is the multiplication operator
eps + dxV (the value of [d/dx, H] in the continuum algebra).  The raw matrix
commutator cannot serve here: in finite dimension tr(P [D, H] P) = 0 exactly
for any spectral projector P of H, so its compression is never positive; the
Dirichlet corner terms carry the compensating negative weight.  The
multiplication form is the quantity the positivity statement actually
controls.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SpectralWindowError
from .grid import DiscreteOperator, GridSpec
from .hamiltonian import FieldParams, assemble_h, assemble_q
from .potentials import PotentialSpec
from .spectral import (BumpFunction, SpectralDecomposition, WeightSpec,
                       apply_function, eigendecompose, localized_spectrum,
                       weight_dx_s)
from .ssf import fit_loglog
from .traces import operator_norm


@dataclass(frozen=True)
class ProbeReport:
    """Parameter sweep with measured norms and derived ratios."""

    params: tuple
    norms: tuple
    slope: float | None = None
    r2: float | None = None

    @property
    def plateau_ratio(self):
        """norm at the smallest parameter over norm at twice that parameter."""
        return self.norms[-1] / self.norms[-2]

    @property
    def sweep_growth(self):
        """Total growth of the norm across the sweep."""
        return self.norms[-1] / self.norms[0]


def mourre_gap_bound(dec: SpectralDecomposition, a, b, fields: FieldParams,
                     dxv):
    """Smallest eigenvalue of the commutator compressed to the [a, b] states.

    The compression uses the multiplication operator eps + dxV; for V = 0 the
    bound equals eps exactly, and a potential clamped to sup|dxV| <= eps/2
    keeps it above eps/2.
    """
    if not a < b:
        raise ConfigurationError(f"need a < b, got a={a}, b={b}")
    sel = (dec.eigenvalues > a) & (dec.eigenvalues <= b)
    if not np.any(sel):
        warnings.warn(f"no eigenvalues in ({a}, {b}]; returning +inf sentinel")
        return float("inf")
    u = dec.eigenvectors[:, sel]
    weights = fields.eps + np.asarray(dxv, dtype=float)
    compressed = (u.conj().T * weights) @ u
    return float(np.linalg.eigvalsh(compressed)[0])


def gap_cutoff_norm(grid: GridSpec, fields: FieldParams, spec: PotentialSpec,
                chi: BumpFunction, q_localized=None, margin=0.2):
    """Operator norm of chi(H) <x>^-2 for a cutoff clear of localized sigma(Q)."""
    if q_localized is None:
        decq = eigendecompose(assemble_q(grid, FieldParams(b=fields.b), spec))
        q_localized = localized_spectrum(decq, grid).values
    lo, hi = chi.support
    q_localized = np.asarray(q_localized, dtype=float)
    if q_localized.size:
        inside = (q_localized > lo - margin) & (q_localized < hi + margin)
        if np.any(inside):
            raise SpectralWindowError(
                f"cutoff support [{lo:.4g}, {hi:.4g}] is within {margin} of "
                f"localized Q eigenvalue(s) {q_localized[inside][:4]}")
    dec = eigendecompose(assemble_h(grid, fields, spec))
    xf, _ = grid.meshes()
    wx = 1.0 / (1.0 + xf * xf)
    return operator_norm(apply_function(dec, chi) * wx[None, :])


def gap_cutoff_sweep(grid: GridSpec, b, spec: PotentialSpec, chi: BumpFunction,
                 eps_list, q_localized=None, margin=0.2) -> ProbeReport:
    """gap_cutoff_norm over an eps sweep with the fitted log-log slope."""
    eps_list = tuple(float(e) for e in eps_list)
    norms = tuple(
        gap_cutoff_norm(grid, FieldParams(b=b, eps=e), spec, chi,
                    q_localized=q_localized, margin=margin)
        for e in eps_list)
    slope, _, r2 = fit_loglog(eps_list, norms)
    return ProbeReport(eps_list, norms, slope=slope, r2=r2)


def lap_probe(h: DiscreteOperator, lam, w: WeightSpec, delta_list) -> ProbeReport:
    """Norms ||<Dx>^-s (H - lam - i delta)^-1 <Dx>^-s|| along a delta sweep."""
    deltas = tuple(float(d) for d in delta_list)
    if any(d < 1e-6 for d in deltas) or any(
            deltas[i] <= deltas[i + 1] for i in range(len(deltas) - 1)):
        raise ConfigurationError(
            f"delta_list must be decreasing and >= 1e-6, got {deltas}")
    wmat = weight_dx_s(h.grid, w)
    n = h.dim
    eye = np.eye(n, dtype=complex)
    norms = []
    for d in deltas:
        r = np.linalg.solve((lam + 1j * d) * eye - h.mat, wmat.astype(complex))
        norms.append(operator_norm(wmat @ r))
    return ProbeReport(deltas, tuple(norms))


@dataclass(frozen=True)
class EmbeddedScan:
    """Localized H eigenvalues in a window and their distance to sigma(Q)."""

    entries: tuple        # (lambda_H, nearest_Q, distance)
    max_distance: float | None


def embedded_eigenvalue_scan(decH: SpectralDecomposition,
                             decQ: SpectralDecomposition, grid: GridSpec,
                             window, margin=0.05) -> EmbeddedScan:
    """Compare localized H states inside the window with localized sigma(Q)."""
    a, b = window
    locH = localized_spectrum(decH, grid, margin=margin)
    locQ = localized_spectrum(decQ, grid, margin=margin)
    lam_h = locH.values[(locH.values >= a) & (locH.values <= b)]
    entries = []
    for lam in lam_h:
        if len(locQ):
            k = int(np.argmin(np.abs(locQ.values - lam)))
            entries.append((float(lam), float(locQ.values[k]),
                            float(abs(locQ.values[k] - lam))))
        else:
            entries.append((float(lam), float("nan"), float("inf")))
    dmax = max((e[2] for e in entries), default=None)
    return EmbeddedScan(tuple(entries), dmax)
