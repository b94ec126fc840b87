"""Truncated rectangular domain and 1D/2D discrete operators.

The domain is [-lx, lx] x [-ly, ly] sampled on nx * ny points including the
walls.  Grid point (i, j) maps to flat index j*nx + i, i.e. row-major with x
fastest.  A 1D operator A acting on the x axis embeds as kron(I_ny, A); one
acting on y embeds as kron(A, I_nx).  All fields outside the sampled box are
treated as zero (hard-wall / Dirichlet truncation).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class GridSpec:
    """Uniform mesh over [-lx, lx] x [-ly, ly] with nx, ny points per axis."""

    lx: float
    ly: float
    nx: int
    ny: int
    hx: float = field(init=False)
    hy: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "hx", 2.0 * self.lx / (self.nx - 1))
        object.__setattr__(self, "hy", 2.0 * self.ly / (self.ny - 1))

    @property
    def n_points(self):
        return self.nx * self.ny

    @property
    def x(self):
        return np.linspace(-self.lx, self.lx, self.nx)

    @property
    def y(self):
        return np.linspace(-self.ly, self.ly, self.ny)

    def meshes(self):
        """Flat coordinate arrays (X, Y) of length nx*ny, x fastest."""
        xg, yg = np.meshgrid(self.x, self.y)  # shape (ny, nx)
        return xg.ravel(), yg.ravel()

    def interior_mask(self, band: int = 2):
        """Flat boolean mask of points at least `band` mesh steps from a wall."""
        ix = np.arange(self.nx)
        iy = np.arange(self.ny)
        okx = (ix >= band) & (ix < self.nx - band)
        oky = (iy >= band) & (iy < self.ny - band)
        return (oky[:, None] & okx[None, :]).ravel()


@dataclass(frozen=True)
class DiscreteOperator:
    """Hermitian matrix with its grid and a role tag (H0, H, Q0, Q, generic)."""

    mat: np.ndarray
    grid: GridSpec
    role: str = "generic"

    @property
    def dim(self):
        return self.mat.shape[0]

    def hermiticity_defect(self):
        return float(np.max(np.abs(self.mat - self.mat.conj().T)))


def make_grid(lx, ly, nx, ny) -> GridSpec:
    """Validate and build a GridSpec; spacings follow h = 2l/(n-1)."""
    if not lx > 0:
        raise ConfigurationError(f"lx must be positive, got {lx}")
    if not ly > 0:
        raise ConfigurationError(f"ly must be positive, got {ly}")
    if nx < 8:
        raise ConfigurationError(f"nx must be at least 8, got {nx}")
    if ny < 8:
        raise ConfigurationError(f"ny must be at least 8, got {ny}")
    return GridSpec(float(lx), float(ly), int(nx), int(ny))


def d1_op(n, h):
    """Centered-difference D = -i d/dx with Dirichlet truncation (Hermitian)."""
    if n < 8:
        raise ConfigurationError(f"n must be at least 8, got {n}")
    if not h > 0:
        raise ConfigurationError(f"h must be positive, got {h}")
    m = np.zeros((n, n), dtype=complex)
    c = 1.0 / (2.0 * h)
    idx = np.arange(n - 1)
    m[idx, idx + 1] = -1j * c
    m[idx + 1, idx] = 1j * c
    return m


def d2_op(n, h):
    """Three-point -d^2/dx^2 with Dirichlet truncation (real symmetric)."""
    if n < 8:
        raise ConfigurationError(f"n must be at least 8, got {n}")
    if not h > 0:
        raise ConfigurationError(f"h must be positive, got {h}")
    m = np.zeros((n, n))
    c = 1.0 / (h * h)
    np.fill_diagonal(m, 2.0 * c)
    idx = np.arange(n - 1)
    m[idx, idx + 1] = -c
    m[idx + 1, idx] = -c
    return m


def position_op(grid: GridSpec, axis, power=1) -> DiscreteOperator:
    """Diagonal multiplication by x**power or y**power on the flat grid."""
    xf, yf = grid.meshes()
    coord = {"x": xf, "y": yf}.get(axis)
    if coord is None:
        raise ConfigurationError(f"axis must be 'x' or 'y', got {axis!r}")
    return DiscreteOperator(np.diag(coord ** power), grid, role="generic")


def embed_x(grid: GridSpec, m1d):
    """Embed a 1D x-axis operator into the 2D grid: kron(I_ny, m1d)."""
    return np.kron(np.eye(grid.ny, dtype=m1d.dtype), m1d)


def embed_y(grid: GridSpec, m1d):
    """Embed a 1D y-axis operator into the 2D grid: kron(m1d, I_nx)."""
    return np.kron(m1d, np.eye(grid.nx, dtype=m1d.dtype))


def scaled_embed_x(grid: GridSpec, yweights, m1d):
    """kron(diag(yweights), m1d): a y-dependent coefficient times an x operator."""
    return np.kron(np.diag(yweights), m1d)
