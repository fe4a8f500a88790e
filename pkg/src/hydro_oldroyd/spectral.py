"""Fourier machinery on the periodic strip (horizontal torus x vertical torus).

Physical arrays have shape ``(ncomp, *spatial)`` with ``spatial`` equal to
``(N_h, N_y)`` for one horizontal dimension and ``(N_h, N_h, N_y)`` for two;
the vertical axis is always last. Coefficients use the full complex FFT in
standard ordering and carry the ``1/(N_h**d_h * N_y)`` factor on the forward
transform, so a coefficient is the amplitude of its Fourier mode: ``sin(y)``
has coefficients ``-i/2`` at ``k=+1`` and ``+i/2`` at ``k=-1``.

Norms are evaluated directly on these amplitudes,

    ||f||^2 = sum_{xi,k} <xi>^{2 s1} <k>^{2 s2} exp(2 r (1 + |xi|)) |f(xi,k)|^2,

which at ``s1 = s2 = r = 0`` is the mean square of the physical samples
(Parseval for the normalised measure on the torus).

Note on naming: the relaxation rate ``1/We`` and the analytic radius share a
symbol in the literature on this model. Here the former is always called
``relaxation_rate`` and the latter ``radius_a`` (or ``r`` for a generic
radius).
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "Grid",
    "SpectralField",
    "NormSpec",
    "WeightOverflowError",
    "EXP_LIMIT",
    "to_spectral",
    "to_physical",
    "derivative",
    "anisotropic_norm",
    "apply_weight",
    "magnitude_field",
    "vertical_mean",
    "remove_vertical_mean",
    "dealias",
    "product",
    "is_hermitian",
]

EXP_LIMIT = 700.0


class WeightOverflowError(OverflowError):
    """The analytic weight exp(r (1 + |xi|)) would overflow double precision."""


@dataclass(frozen=True)
class Grid:
    """Mode grid of the periodic strip.

    Attributes:
        d_h: number of horizontal dimensions, 1 or 2.
        n_h: modes (= samples) per horizontal axis.
        n_y: vertical modes.
        l_h: horizontal period.
    """

    d_h: int = 1
    n_h: int = 32
    n_y: int = 32
    l_h: float = 2 * np.pi
    l_y: float = field(default=2 * np.pi, init=False)

    def __post_init__(self):
        if self.d_h not in (1, 2):
            raise ValueError(f"d_h must be 1 or 2, got {self.d_h}")
        for name in ("n_h", "n_y"):
            n = getattr(self, name)
            if n < 4 or n % 2:
                raise ValueError(f"{name} must be even and >= 4, got {n}")
        if not self.l_h > 0:
            raise ValueError(f"l_h must be positive, got {self.l_h}")

    @property
    def shape(self):
        return (self.n_h,) * self.d_h + (self.n_y,)

    @property
    def size(self):
        return self.n_h**self.d_h * self.n_y

    @property
    def h_axes(self):
        """Axes of a ``(ncomp, *spatial)`` array that are horizontal."""
        return tuple(range(1, self.d_h + 1))

    @property
    def spatial_axes(self):
        return tuple(range(1, self.d_h + 2))

    def _broadcast(self, vec, axis):
        shape = [1] * (self.d_h + 1)
        shape[axis] = vec.size
        return vec.reshape(shape)

    @cached_property
    def _xi_1d(self):
        return 2 * np.pi / self.l_h * np.fft.fftfreq(self.n_h, 1.0 / self.n_h)

    @cached_property
    def _k_1d(self):
        return np.fft.fftfreq(self.n_y, 1.0 / self.n_y)

    def xi(self, axis, odd=False):
        """Horizontal wavenumber along ``axis`` (0 or 1), broadcastable.

        With ``odd=True`` the Nyquist entry is zeroed so that odd-order
        derivatives map real fields to real fields.
        """
        if axis >= self.d_h:
            raise ValueError(f"horizontal axis {axis} not present for d_h={self.d_h}")
        vec = self._xi_1d.copy()
        if odd:
            vec[self.n_h // 2] = 0.0
        return self._broadcast(vec, axis)

    def k(self, odd=False):
        vec = self._k_1d.copy()
        if odd:
            vec[self.n_y // 2] = 0.0
        return self._broadcast(vec, self.d_h)

    @cached_property
    def xi_abs(self):
        """|xi| on the spatial mode grid (Nyquist kept)."""
        sq = sum(self.xi(i) ** 2 for i in range(self.d_h))
        return np.sqrt(sq) * np.ones(self.shape)

    @cached_property
    def xi_max(self):
        return float(self.xi_abs.max())

    @cached_property
    def dealias_mask(self):
        keep = np.abs(self.k()) <= self.n_y / 3
        for i in range(self.d_h):
            keep = keep & (np.abs(self.xi(i) * self.l_h / (2 * np.pi)) <= self.n_h / 3)
        return keep

    def points(self):
        """Physical sample coordinates as a list ``[x1, (x2,) y]`` of full arrays."""
        xs = [np.arange(self.n_h) * self.l_h / self.n_h] * self.d_h
        ys = np.arange(self.n_y) * self.l_y / self.n_y
        return np.meshgrid(*xs, ys, indexing="ij")

    def sobolev_weight(self, s1, s2, r=0.0):
        """Amplitude multiplier <xi>^s1 <k>^s2 exp(r (1+|xi|))."""
        check_radius(self, r)
        kk = self.k()
        w = (1.0 + self.xi_abs**2) ** (0.5 * s1) * (1.0 + kk**2) ** (0.5 * s2)
        if r:
            w = w * np.exp(r * (1.0 + self.xi_abs))
        return w


def check_radius(grid, r):
    if r < 0:
        raise ValueError(f"analytic radius must be >= 0, got {r}")
    expo = r * (1.0 + grid.xi_max)
    if expo > EXP_LIMIT:
        raise WeightOverflowError(
            f"r*(1+|xi|_max) = {expo:.6g} exceeds {EXP_LIMIT}: exp would overflow "
            f"(r={r}, |xi|_max={grid.xi_max:.6g})"
        )


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier amplitudes of a (possibly multi-component) field.

    ``coeffs`` has shape ``(ncomp, *grid.shape)``.
    """

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == self.grid.d_h + 1:
            c = c[None]
        if c.shape[1:] != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape[1:]} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def ncomp(self):
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, grid, ncomp=1):
        return cls(grid, np.zeros((ncomp,) + grid.shape, dtype=complex))

    def __getitem__(self, idx):
        c = self.coeffs[idx]
        return SpectralField(self.grid, c if c.ndim == self.grid.d_h + 2 else c[None])

    def _coerce(self, other):
        if isinstance(other, SpectralField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.coeffs
        return other

    def __add__(self, other):
        return SpectralField(self.grid, self.coeffs + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return SpectralField(self.grid, self.coeffs - self._coerce(other))

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def copy(self):
        return SpectralField(self.grid, self.coeffs.copy())


@dataclass(frozen=True)
class NormSpec:
    """Selects the H^{s1,s2} norm weighted by exp(r <D_x>)."""

    s1: float = 0.0
    s2: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.s1) and np.isfinite(self.s2)):
            raise ValueError("Sobolev indices must be finite")
        if not self.r >= 0:
            raise ValueError(f"radius must be >= 0, got {self.r}")


def to_spectral(grid, samples):
    """Forward transform of physical samples (component axis optional)."""
    a = np.asarray(samples)
    if a.shape == grid.shape:
        a = a[None]
    if a.shape[1:] != grid.shape:
        raise ValueError(f"sample shape {a.shape} does not match grid {grid.shape}")
    return SpectralField(grid, np.fft.fftn(a, axes=grid.spatial_axes) / grid.size)


def to_physical(f, real=True):
    """Inverse transform; returns ``(ncomp, *grid.shape)`` samples."""
    out = np.fft.ifftn(f.coeffs, axes=f.grid.spatial_axes) * f.grid.size
    return out.real if real else out


def derivative(f, axis, order=1):
    """Spectral derivative: every mode times (i * wavenumber)**order.

    ``axis`` is ``"y"`` or a horizontal index ``0``/``1`` (``"x"`` is an alias
    for ``0``).
    """
    g = f.grid
    odd = order % 2 == 1
    if axis == "y":
        kv = g.k(odd)
    else:
        kv = g.xi(0 if axis == "x" else axis, odd)
    return SpectralField(g, f.coeffs * (1j * kv) ** order)


def anisotropic_norm(f, spec):
    """||exp(r <D_x>) f||_{H^{s1,s2}} summed over components."""
    w = f.grid.sobolev_weight(spec.s1, spec.s2, spec.r)
    return float(np.sqrt(np.sum((w * np.abs(f.coeffs)) ** 2)))


def apply_weight(f, r):
    """f_Psi for the phase Psi = r (1 + |xi|); ``r = 0`` returns f unchanged."""
    check_radius(f.grid, r)
    if r == 0:
        return f.copy()
    return SpectralField(f.grid, f.coeffs * np.exp(r * (1.0 + f.grid.xi_abs)))


def magnitude_field(f):
    """a+ : the field whose coefficients are the moduli of those of ``f``."""
    return SpectralField(f.grid, np.abs(f.coeffs).astype(complex))


def _k0_index(grid):
    return (slice(None),) * (grid.d_h + 1) + (0,)


def vertical_mean(f):
    """The y-independent part of ``f`` (its k = 0 slice), same grid."""
    out = np.zeros_like(f.coeffs)
    idx = _k0_index(f.grid)
    out[idx] = f.coeffs[idx]
    return SpectralField(f.grid, out)


def remove_vertical_mean(f):
    out = f.coeffs.copy()
    out[_k0_index(f.grid)] = 0.0
    return SpectralField(f.grid, out)


def dealias(f):
    """Zero every mode with a wavenumber index above N/3 on any axis."""
    return SpectralField(f.grid, f.coeffs * f.grid.dealias_mask)


def product(a, b):
    """Dealiased pointwise product; component counts broadcast."""
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    return dealias(to_spectral(a.grid, to_physical(a) * to_physical(b)))


def hermitian_partner(grid, coeffs):
    """coeffs evaluated at (-xi, -k), in standard FFT ordering."""
    axes = grid.spatial_axes
    return np.roll(np.flip(coeffs, axis=axes), 1, axis=axes)


def is_hermitian(f, atol=1e-12):
    """True when coeff(-xi,-k) == conj(coeff(xi,k)) for every component."""
    partner = hermitian_partner(f.grid, f.coeffs)
    scale = max(1.0, float(np.abs(f.coeffs).max(initial=0.0)))
    return bool(np.all(np.abs(partner - np.conj(f.coeffs)) <= atol * scale))
