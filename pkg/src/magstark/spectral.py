"""Eigendecomposition, matrix functional calculus, projectors and weights.

All functional calculus goes through one exact Hermitian eigendecomposition:
f(M) = U diag(f(lam)) U*.  Smooth compactly supported test functions are the
C-infinity bump exp(1 - 1/(1-u^2)) on |u| < 1, optionally with a flat plateau
where the function is identically 1.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CapacityError, ConfigurationError
from .grid import DiscreteOperator, GridSpec, d2_op, embed_x

DENSE_LIMIT = 6400


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source: DiscreteOperator

    @property
    def dim(self):
        return self.eigenvalues.size

    def reconstruction_defect(self):
        m = (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T
        return float(np.max(np.abs(m - self.source.mat)))

    def orthonormality_defect(self):
        u = self.eigenvectors
        g = u.conj().T @ u
        return float(np.max(np.abs(g - np.eye(self.dim))))


def eigendecompose(op: DiscreteOperator, dense_limit=DENSE_LIMIT):
    """Full Hermitian eigendecomposition; refuses matrices over the dense limit."""
    n = op.dim
    if n > dense_limit:
        raise CapacityError(
            f"matrix dimension {n} exceeds the dense limit {dense_limit}; "
            "use a coarser grid or raise the limit")
    lam, u = scipy.linalg.eigh(op.mat)
    return SpectralDecomposition(lam, u, op)


@dataclass(frozen=True)
class BumpFunction:
    """C-infinity bump supported on [center - halfwidth, center + halfwidth].

    With plateau > 0 the function equals 1 on |t - center| <= plateau *
    halfwidth and falls smoothly to 0 at the support edge (the cutoff shape
    used where a test function must be identically 1 near a point).
    """

    center: float
    halfwidth: float
    plateau: float = 0.0

    def __post_init__(self):
        if not self.halfwidth > 0:
            raise ConfigurationError(
                f"halfwidth must be positive, got {self.halfwidth}")
        if not 0.0 <= self.plateau < 1.0:
            raise ConfigurationError(
                f"plateau must lie in [0, 1), got {self.plateau}")

    @property
    def support(self):
        return self.center - self.halfwidth, self.center + self.halfwidth

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = np.abs(t - self.center) / self.halfwidth
        out = np.zeros(u.shape)
        if self.plateau == 0.0:
            inside = u < 1.0
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        else:
            out[u <= self.plateau] = 1.0
            shoulder = (u > self.plateau) & (u < 1.0)
            s = (u[shoulder] - self.plateau) / (1.0 - self.plateau)
            out[shoulder] = _smooth_step(1.0 - s)
        return out if out.shape else float(out)

    def derivative(self, t):
        """Exact derivative d/dt of the bump (closed form, no differencing)."""
        t = np.asarray(t, dtype=float)
        v = (t - self.center) / self.halfwidth
        u = np.abs(v)
        out = np.zeros(u.shape)
        if self.plateau == 0.0:
            inside = u < 1.0
            w = 1.0 - u[inside] ** 2
            out[inside] = (np.exp(1.0 - 1.0 / w) * (-2.0 * v[inside] / w ** 2)
                           / self.halfwidth)
        else:
            shoulder = (u > self.plateau) & (u < 1.0)
            s = (u[shoulder] - self.plateau) / (1.0 - self.plateau)
            ds = _smooth_step_d(1.0 - s) * (-1.0 / (1.0 - self.plateau))
            out[shoulder] = ds * np.sign(v[shoulder]) / self.halfwidth
        return out if out.shape else float(out)


def _smooth_step(s):
    """C-infinity monotone 0 -> 1 transition on [0, 1]."""
    s = np.asarray(s, dtype=float)
    a = np.zeros(s.shape)
    pos = s > 0.0
    a[pos] = np.exp(-1.0 / s[pos])
    b = np.zeros(s.shape)
    neg = s < 1.0
    b[neg] = np.exp(-1.0 / (1.0 - s[neg]))
    return a / (a + b)


def _smooth_step_d(s):
    """Derivative of the smooth step (zero at and beyond both ends)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    mid = (s > 0.0) & (s < 1.0)
    sm = s[mid]
    a = np.exp(-1.0 / sm)
    b = np.exp(-1.0 / (1.0 - sm))
    da = a / sm ** 2
    db = -b / (1.0 - sm) ** 2
    out[mid] = (da * b - a * db) / (a + b) ** 2
    return out


def apply_function(dec: SpectralDecomposition, f):
    """f(M) = U diag(f(lam)) U* for any callable f on the spectrum."""
    fvals = np.asarray(f(dec.eigenvalues))
    u = dec.eigenvectors
    return (u * fvals) @ u.conj().T


def trace_function(dec: SpectralDecomposition, f):
    """tr f(M) as a plain eigenvalue sum."""
    return float(np.sum(f(dec.eigenvalues)))


def weighted_trace_function(dec: SpectralDecomposition, weights, f):
    """tr(diag(weights) f(M)) without forming f(M)."""
    fvals = np.asarray(f(dec.eigenvalues))
    dens = np.abs(dec.eigenvectors) ** 2
    return float(weights @ dens @ fvals)


def spectral_projector(dec: SpectralDecomposition, a, b):
    """Orthogonal projector onto eigenvectors with eigenvalue in (a, b].

    Eigenvalues exactly at a cut belong to the left interval, so adjacent
    projectors tile without overlap.  An empty selection returns the zero
    matrix (flagged by rank 0), not an error.
    """
    if not a < b:
        raise ConfigurationError(f"need a < b, got a={a}, b={b}")
    sel = (dec.eigenvalues > a) & (dec.eigenvalues <= b)
    u = dec.eigenvectors[:, sel]
    return u @ u.conj().T


def projector_rank(dec: SpectralDecomposition, a, b):
    return int(np.count_nonzero((dec.eigenvalues > a) & (dec.eigenvalues <= b)))


@dataclass(frozen=True)
class WeightSpec:
    """Exponents for the <Dx>^-s, <x>^p and power-decay k_j weights."""

    s: float = 0.75
    p: float = -2.0
    delta: float = 0.5

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigurationError(f"delta must be positive, got {self.delta}")


def weight_dx_s(grid: GridSpec, w: WeightSpec, power=None):
    """(1 + Dx^2)^(power/2) built from the 1D Dirichlet Dx^2 eigenbasis.

    Default power is -w.s (the smoothing weight of the resolvent probes,
    requiring s in (1/2, 1)); an explicit power builds the matching growing
    weight used by the trace-class experiments.
    """
    if power is None:
        if not 0.5 < w.s < 1.0:
            raise ConfigurationError(
                f"s must lie in (1/2, 1) for resolvent weights, got {w.s}")
        power = -w.s
    lam, u = np.linalg.eigh(d2_op(grid.nx, grid.hx))
    w1d = (u * (1.0 + lam) ** (power / 2.0)) @ u.T
    return embed_x(grid, w1d)


def weight_x_power(grid: GridSpec, p):
    """Diagonal weight <x>^p with <x> = sqrt(1 + x^2)."""
    xf, _ = grid.meshes()
    return (1.0 + xf * xf) ** (p / 2.0)


def decay_weight(grid: GridSpec, j, delta):
    """Diagonal k_j = <x>^(-j(1+delta)) <y>^(-j(1/2+delta)) of the norm bounds."""
    xf, yf = grid.meshes()
    return ((1.0 + xf * xf) ** (-j * (1.0 + delta) / 2.0)
            * (1.0 + yf * yf) ** (-j * (0.5 + delta) / 2.0))


@dataclass(frozen=True)
class LocalizedSpectrum:
    """Eigenvalues whose eigenvectors carry >= 0.99 mass in the interior box."""

    values: np.ndarray
    scores: np.ndarray
    margin: float

    def __len__(self):
        return self.values.size


LOCALIZATION_THRESHOLD = 0.99


def localization_scores(dec: SpectralDecomposition, grid: GridSpec, margin):
    """Interior-box mass fraction of every eigenvector.

    The box is the centered rectangle of relative size (1 - 2 margin) per
    axis; wall-hugging truncation artifacts score low, gaussian-decaying
    physical states score near 1.
    """
    if not 0.0 < margin < 0.5:
        raise ConfigurationError(f"margin must lie in (0, 0.5), got {margin}")
    xf, yf = grid.meshes()
    inside = ((np.abs(xf) <= (1.0 - 2.0 * margin) * grid.lx + 1e-12)
              & (np.abs(yf) <= (1.0 - 2.0 * margin) * grid.ly + 1e-12))
    dens = np.abs(dec.eigenvectors) ** 2
    return dens[inside, :].sum(axis=0)


def localized_spectrum(dec: SpectralDecomposition, grid: GridSpec,
                       margin=0.05) -> LocalizedSpectrum:
    """Eigenpairs passing the interior-mass test: the discrete proxy for sigma(Q)."""
    scores = localization_scores(dec, grid, margin)
    keep = scores > LOCALIZATION_THRESHOLD
    return LocalizedSpectrum(dec.eigenvalues[keep], scores[keep], margin)
