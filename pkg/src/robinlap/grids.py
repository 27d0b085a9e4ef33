"""Periodic boundary lattice, slab lattice, discrete transforms and norms.

The boundary of the half-space is truncated to a torus ``[-L/2, L/2)^(d-1)``
with ``N`` samples per axis; the normal direction is truncated to ``[0, H]``
with a Neumann wall at ``x_d = H`` and a cosine basis
``cos(k*pi*x_d/H), k = 0..Nd-1`` collocated at the midpoints
``x_d = (j+1/2)*H/Nd``.

Transform conventions
---------------------
The forward boundary transform approximates the continuum Fourier integral
``(2*pi)^(-(d-1)/2) * integral g(x) exp(-i xi.x) dx`` and is exact for
band-limited functions on the torus.  With node weight ``(L/N)^(d-1)`` and
frequency weight ``(2*pi/L)^(d-1)`` the transform is unitary, so Parseval
holds between the two quadratures and the spectral ``H^s`` norm at ``s = 0``
coincides with the node-quadrature ``L^2`` norm.

Slab fields may carry, next to their node samples, analytic exponential
layers ``amp(xi) * exp(i xi.x') * P_xi(x_d)`` where the profile solves
``-P'' + (|xi|^2 - lambda) P = 0``.  Inner products involving layers are
evaluated with closed-form integrals of the profiles against cosine modes,
so no quadrature error enters; see :class:`LayerPart`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import GridMismatchError

_TWO_PI = 2.0 * np.pi


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class BoundaryGrid:
    """Uniform periodic lattice on the boundary ``[-L/2, L/2)^(d-1)``.

    ``d`` is the dimension of the half-space, so the boundary has ``d - 1``
    axes with ``N`` nodes each.  Grids are immutable; transforms allocate
    per-call scratch only, so concurrent use on distinct inputs is safe.
    """

    d: int
    N: int
    L: float

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"half-space dimension must be 2 or 3, got {self.d}")
        if self.N < 4 or not _is_power_of_two(self.N):
            raise ValueError(f"N must be a power of two >= 4, got {self.N}")
        if not (self.L > 0):
            raise ValueError(f"box side must be positive, got {self.L}")

    @property
    def ndim(self) -> int:
        return self.d - 1

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.ndim

    @property
    def node_count(self) -> int:
        return self.N ** self.ndim

    @property
    def node_weight(self) -> float:
        return self.h ** self.ndim

    @property
    def freq_weight(self) -> float:
        return (_TWO_PI / self.L) ** self.ndim

    @cached_property
    def axis_nodes(self) -> np.ndarray:
        return -self.L / 2 + self.h * np.arange(self.N)

    @cached_property
    def axis_freqs(self) -> np.ndarray:
        return _TWO_PI * np.fft.fftfreq(self.N, d=self.h)

    def node_mesh(self) -> tuple:
        return np.meshgrid(*([self.axis_nodes] * self.ndim), indexing="ij")

    def freq_mesh(self) -> tuple:
        return np.meshgrid(*([self.axis_freqs] * self.ndim), indexing="ij")

    @cached_property
    def xi_sq(self) -> np.ndarray:
        """|xi|^2 on the frequency lattice, fft layout."""
        mesh = self.freq_mesh()
        return sum(m**2 for m in mesh)

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i xi L/2) per axis = (-1)^k for integer mode index k
        k = np.fft.fftfreq(self.N) * self.N
        sign = np.where(np.round(k).astype(int) % 2 == 0, 1.0, -1.0)
        mesh = np.meshgrid(*([sign] * self.ndim), indexing="ij")
        return np.prod(np.stack(mesh), axis=0)

    def compatible(self, other: "BoundaryGrid") -> bool:
        return self == other


@dataclass(frozen=True)
class SlabGrid:
    """Tensor lattice on the slab ``[-L/2, L/2)^(d-1) x [0, H]``."""

    boundary: BoundaryGrid
    H: float
    Nd: int

    def __post_init__(self):
        if not (self.H > 0):
            raise ValueError(f"slab height must be positive, got {self.H}")
        if self.Nd < 4:
            raise ValueError(f"Nd must be at least 4, got {self.Nd}")

    @property
    def shape(self) -> tuple:
        return self.boundary.shape + (self.Nd,)

    @property
    def node_count(self) -> int:
        return self.boundary.node_count * self.Nd

    @property
    def node_weight(self) -> float:
        return self.boundary.node_weight * (self.H / self.Nd)

    @cached_property
    def z_nodes(self) -> np.ndarray:
        return (np.arange(self.Nd) + 0.5) * (self.H / self.Nd)

    @cached_property
    def mu(self) -> np.ndarray:
        """Neumann eigenvalues (k*pi/H)^2 of the normal direction."""
        return (np.arange(self.Nd) * np.pi / self.H) ** 2

    @cached_property
    def cos_weights(self) -> np.ndarray:
        """L^2(0,H) norms squared of the cosine modes: H, H/2, H/2, ..."""
        w = np.full(self.Nd, self.H / 2.0)
        w[0] = self.H
        return w


# ---------------------------------------------------------------------------
# boundary transforms


def forward_transform(grid: BoundaryGrid, values: np.ndarray) -> np.ndarray:
    """Node samples -> frequency samples (unitary between the two quadratures).

    Accepts trailing extra axes (e.g. a slab z-axis); the transform acts on
    the leading ``d - 1`` axes.
    """
    axes = tuple(range(grid.ndim))
    scale = (grid.h / np.sqrt(_TWO_PI)) ** grid.ndim
    out = np.fft.fftn(np.asarray(values, dtype=complex), axes=axes)
    phase = grid._phase
    if out.ndim > grid.ndim:
        phase = phase.reshape(phase.shape + (1,) * (out.ndim - grid.ndim))
    return scale * phase * out


def inverse_transform(grid: BoundaryGrid, coeffs: np.ndarray) -> np.ndarray:
    """Frequency samples -> node samples; inverse of :func:`forward_transform`."""
    axes = tuple(range(grid.ndim))
    scale = (np.sqrt(_TWO_PI) / grid.h) ** grid.ndim
    phase = grid._phase
    arr = np.asarray(coeffs, dtype=complex)
    if arr.ndim > grid.ndim:
        phase = phase.reshape(phase.shape + (1,) * (arr.ndim - grid.ndim))
    return scale * np.fft.ifftn(np.conj(phase) * arr, axes=axes)


def cosine_analysis(slab: SlabGrid, values: np.ndarray) -> np.ndarray:
    """Midpoint samples -> cosine-mode coefficients a_k along the last axis."""
    y = scipy.fft.dct(np.asarray(values, dtype=complex), type=2, axis=-1)
    y[..., 0] *= 0.5
    return y / slab.Nd


def cosine_synthesis(slab: SlabGrid, a: np.ndarray) -> np.ndarray:
    """Cosine-mode coefficients -> midpoint samples (inverse of analysis)."""
    y = np.asarray(a, dtype=complex) * slab.Nd
    y = y.copy()
    y[..., 0] *= 2.0
    return scipy.fft.idct(y, type=2, axis=-1)


def mixed_analysis(slab: SlabGrid, values: np.ndarray) -> np.ndarray:
    """Full spectral coefficients: boundary transform of the cosine analysis."""
    return forward_transform(slab.boundary, cosine_analysis(slab, values))


def mixed_synthesis(slab: SlabGrid, coeffs: np.ndarray) -> np.ndarray:
    return cosine_synthesis(slab, inverse_transform(slab.boundary, coeffs))


# ---------------------------------------------------------------------------
# grid functions


@dataclass
class GridFunction:
    """Complex samples on a boundary grid, in node or frequency space."""

    grid: BoundaryGrid
    values: np.ndarray
    space: str = "node"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise GridMismatchError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if self.space not in ("node", "freq"):
            raise ValueError(f"space must be 'node' or 'freq', got {self.space!r}")

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy(), self.space)

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values + other.values, self.space)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values - other.values, self.space)

    def __mul__(self, factor):
        return GridFunction(self.grid, self.values * factor, self.space)

    __rmul__ = __mul__

    def _check(self, other):
        if not isinstance(other, GridFunction):
            raise TypeError("expected a GridFunction")
        if other.grid != self.grid or other.space != self.space:
            raise GridMismatchError("grid functions live on different grids/spaces")


def dft(g: GridFunction, direction: str = "forward") -> GridFunction:
    """Unitary discrete Fourier transform between node and frequency space."""
    if direction == "forward":
        if g.space != "node":
            raise ValueError("forward transform expects a node-space function")
        return GridFunction(g.grid, forward_transform(g.grid, g.values), "freq")
    if direction == "inverse":
        if g.space != "freq":
            raise ValueError("inverse transform expects a frequency-space function")
        return GridFunction(g.grid, inverse_transform(g.grid, g.values), "node")
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def boundary_inner(f: GridFunction, g: GridFunction) -> complex:
    """Quadrature inner product <f, g> with the weight of the function's space."""
    f._check(g)
    w = f.grid.node_weight if f.space == "node" else f.grid.freq_weight
    return complex(w * np.sum(f.values * np.conj(g.values)))


# ---------------------------------------------------------------------------
# analytic layers on the slab


def _stable_sinhc(x: np.ndarray) -> np.ndarray:
    """sinh(x)/x, stable for small |x|."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-6
    safe = np.where(small, 1.0, x)
    out = np.sinh(safe) / safe
    return np.where(small, 1.0 + x**2 / 6.0, out)


@dataclass(frozen=True)
class LayerPart:
    """Analytic exponential component of a slab field.

    Represents ``sum_xi amps(xi) exp(i xi.x') P_xi(x_d)`` where ``amps`` is in
    the frequency convention of :func:`forward_transform` and the profile is

    * ``halfspace``: ``P(z) = exp(-omega z)``,
    * ``slab``:      ``P(z) = cosh(omega (H - z)) / cosh(omega H)``,

    with ``omega = sqrt(|xi|^2 - lam)``, principal branch (``Re omega > 0``).
    Both profiles satisfy ``P(0) = 1``, so ``amps`` carries the Dirichlet
    trace of each mode; the Neumann trace is ``neumann_factor() * amps``.
    """

    grid: SlabGrid
    amps: np.ndarray
    lam: complex
    geometry: str

    def __post_init__(self):
        object.__setattr__(self, "amps", np.asarray(self.amps, dtype=complex))
        if self.amps.shape != self.grid.boundary.shape:
            raise GridMismatchError("layer amplitudes do not match the boundary lattice")
        if self.geometry not in ("halfspace", "slab"):
            raise ValueError(f"unknown geometry {self.geometry!r}")

    @cached_property
    def omega(self) -> np.ndarray:
        return np.sqrt(self.grid.boundary.xi_sq - self.lam + 0j)

    def neumann_factor(self) -> np.ndarray:
        """Per-mode factor mapping the Dirichlet to the Neumann trace -dP/dz(0)."""
        if self.geometry == "halfspace":
            return self.omega
        return self.omega * np.tanh(self.omega * self.grid.H)

    def helmholtz_factor(self, lam: complex) -> np.ndarray:
        """Per-mode factor of (-Laplace - lam) on the layer: |xi|^2 - omega^2 - lam."""
        return self.grid.boundary.xi_sq - self.omega**2 - lam

    def profile(self, z: np.ndarray) -> np.ndarray:
        """Profile values, shape ``boundary.shape + z.shape``; overflow-safe."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        om = self.omega[..., None]
        H = self.grid.H
        if self.geometry == "halfspace":
            return np.exp(-om * z)
        # cosh(om (H-z)) / cosh(om H) in decaying exponentials only
        num = np.exp(-om * z) * (1.0 + np.exp(-2.0 * om * (H - z)))
        den = 1.0 + np.exp(-2.0 * om * H)
        return num / den

    def sample(self) -> np.ndarray:
        """Node samples of the layer on the slab lattice."""
        prof = self.profile(self.grid.z_nodes)
        return inverse_transform(self.grid.boundary, self.amps[..., None] * prof)

    def cosine_integrals(self) -> np.ndarray:
        """Exact integrals ``I_k = int_0^H P(z) cos(k pi z / H) dz``.

        Shape ``boundary.shape + (Nd,)``.  Follows from integrating
        ``P'' = omega^2 P`` by parts twice.
        """
        om = self.omega[..., None]
        mu = self.grid.mu
        H = self.grid.H
        if self.geometry == "halfspace":
            signs = np.where(np.arange(self.grid.Nd) % 2 == 0, 1.0, -1.0)
            return om * (1.0 - signs * np.exp(-om * H)) / (om**2 + mu)
        return om * np.tanh(om * H) / (om**2 + mu)

    def pair_integrals(self, other: "LayerPart") -> np.ndarray:
        """Exact integrals ``int_0^H P_self(z) conj(P_other(z)) dz`` per mode."""
        if self.geometry != other.geometry or self.grid != other.grid:
            raise GridMismatchError("layers must share grid and geometry")
        a = self.omega
        b = np.conj(other.omega)
        H = self.grid.H
        if self.geometry == "halfspace":
            s = a + b
            return (1.0 - np.exp(-s * H)) / s
        e2a = np.exp(-2.0 * a * H)
        e2b = np.exp(-2.0 * b * H)
        term1 = (1.0 - e2a * e2b) / (a + b)
        term2 = 2.0 * H * np.exp(-(a + b) * H) * _stable_sinhc((a - b) * H)
        return (term1 + term2) / ((1.0 + e2a) * (1.0 + e2b))

    def scaled(self, factor: np.ndarray) -> "LayerPart":
        """Layer with amplitudes multiplied by a per-mode factor."""
        return LayerPart(self.grid, self.amps * factor, self.lam, self.geometry)


@dataclass
class SlabFunction:
    """Complex field on a slab: node samples plus optional analytic layers.

    ``values`` always holds samples of the full field at the collocation
    nodes.  The band-limited cosine interpolant of ``values`` minus the layer
    samples is the "cosine part"; layers keep the exact representation of
    boundary-driven components so traces and residuals carry no truncation
    error in the normal direction.
    """

    grid: SlabGrid
    values: np.ndarray
    layers: tuple = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise GridMismatchError(
                f"values shape {self.values.shape} != slab shape {self.grid.shape}"
            )
        self.layers = tuple(self.layers)
        for lay in self.layers:
            if lay.grid != self.grid:
                raise GridMismatchError("layer grid differs from field grid")

    @classmethod
    def from_cosine(cls, grid: SlabGrid, values: np.ndarray) -> "SlabFunction":
        return cls(grid, values)

    @classmethod
    def from_layer(cls, layer: LayerPart) -> "SlabFunction":
        return cls(layer.grid, layer.sample(), (layer,))

    @classmethod
    def from_parts(cls, grid, cosine_values, layers) -> "SlabFunction":
        total = np.asarray(cosine_values, dtype=complex)
        for lay in layers:
            total = total + lay.sample()
        return cls(grid, total, tuple(layers))

    def cosine_values(self) -> np.ndarray:
        """Samples of the field with all layer samples removed."""
        out = self.values
        for lay in self.layers:
            out = out - lay.sample()
        return out

    def cosine_coefficients(self) -> np.ndarray:
        """Mixed Fourier-cosine coefficients of the cosine part."""
        return mixed_analysis(self.grid, self.cosine_values())

    def __add__(self, other):
        if not isinstance(other, SlabFunction) or other.grid != self.grid:
            raise GridMismatchError("slab functions live on different grids")
        return SlabFunction(self.grid, self.values + other.values, self.layers + other.layers)

    def __sub__(self, other):
        if not isinstance(other, SlabFunction) or other.grid != self.grid:
            raise GridMismatchError("slab functions live on different grids")
        neg = tuple(lay.scaled(-1.0) for lay in other.layers)
        return SlabFunction(self.grid, self.values - other.values, self.layers + neg)

    def __mul__(self, factor):
        if not np.isscalar(factor):
            raise TypeError("slab functions only support scalar scaling")
        return SlabFunction(
            self.grid, self.values * factor, tuple(l.scaled(factor) for l in self.layers)
        )

    __rmul__ = __mul__


def slab_inner(u: SlabFunction, v: SlabFunction) -> complex:
    """Exact L^2 inner product on the slab.

    Cosine x cosine pairs use node quadrature (exact for band-limited
    fields); pairs involving layers use the closed-form profile integrals.
    """
    if u.grid != v.grid:
        raise GridMismatchError("slab functions live on different grids")
    grid = u.grid
    wf = grid.boundary.freq_weight
    uc = u.cosine_values()
    vc = v.cosine_values()
    total = grid.node_weight * np.sum(uc * np.conj(vc))
    ua = forward_transform(grid.boundary, cosine_analysis(grid, uc)) if u.layers or v.layers else None
    va = forward_transform(grid.boundary, cosine_analysis(grid, vc)) if u.layers or v.layers else None
    for lay in v.layers:
        ik = lay.cosine_integrals()
        total += wf * np.sum(ua * np.conj(lay.amps[..., None] * ik))
    for lay in u.layers:
        ik = lay.cosine_integrals()
        total += wf * np.sum(lay.amps[..., None] * ik * np.conj(va))
    for lu in u.layers:
        for lv in v.layers:
            j = lu.pair_integrals(lv)
            total += wf * np.sum(lu.amps * np.conj(lv.amps) * j)
    return complex(total)


def slab_norm(u: SlabFunction) -> float:
    val = slab_inner(u, u).real
    return float(np.sqrt(max(val, 0.0)))


def helmholtz_apply(u: SlabFunction, lam: complex) -> SlabFunction:
    """Apply ``(-Laplace - lam)``: spectral on the cosine part, analytic on layers."""
    grid = u.grid
    coeffs = u.cosine_coefficients()
    symbol = grid.boundary.xi_sq[..., None] + grid.mu - lam
    cos_part = mixed_synthesis(grid, symbol * coeffs)
    new_layers = tuple(lay.scaled(lay.helmholtz_factor(lam)) for lay in u.layers)
    return SlabFunction.from_parts(grid, cos_part, new_layers)


# ---------------------------------------------------------------------------
# norms


def norm(g, kind: str = "L2", *, p: float = 2.0, s: float = 0.0) -> float:
    """Norm of a grid function.

    ``kind`` is one of ``"L2"``, ``"Lp"`` (node quadrature with exponent
    ``p >= 1``) or ``"Hs"`` (spectral, boundary functions: weight
    ``(1+|xi|^2)^s``; slab functions: weight ``(1+|xi|^2+mu_k)^s`` on the
    mixed coefficients).
    """
    if isinstance(g, SlabFunction):
        return _slab_norm_kind(g, kind, p, s)
    if not isinstance(g, GridFunction):
        raise TypeError("expected a GridFunction or SlabFunction")
    grid = g.grid
    if kind == "L2":
        w = grid.node_weight if g.space == "node" else grid.freq_weight
        return float(np.sqrt(w * np.sum(np.abs(g.values) ** 2)))
    if kind == "Lp":
        if p < 1:
            raise ValueError(f"Lp norm needs p >= 1, got {p}")
        w = grid.node_weight if g.space == "node" else grid.freq_weight
        return float((w * np.sum(np.abs(g.values) ** p)) ** (1.0 / p))
    if kind == "Hs":
        coeffs = g.values if g.space == "freq" else forward_transform(grid, g.values)
        weight = (1.0 + grid.xi_sq) ** s
        return float(np.sqrt(grid.freq_weight * np.sum(weight * np.abs(coeffs) ** 2)))
    raise ValueError(f"unknown norm kind {kind!r}")


def _slab_norm_kind(g: SlabFunction, kind: str, p: float, s: float) -> float:
    grid = g.grid
    if kind == "L2":
        return slab_norm(g)
    if kind == "Lp":
        if p < 1:
            raise ValueError(f"Lp norm needs p >= 1, got {p}")
        return float((grid.node_weight * np.sum(np.abs(g.values) ** p)) ** (1.0 / p))
    if kind == "Hs":
        if g.layers:
            raise ValueError("spectral H^s norm needs a band-limited (cosine) field")
        coeffs = g.cosine_coefficients()
        weight = (1.0 + grid.boundary.xi_sq[..., None] + grid.mu) ** s
        wsum = np.sum(weight * grid.cos_weights * np.abs(coeffs) ** 2)
        return float(np.sqrt(grid.boundary.freq_weight * wsum))
    raise ValueError(f"unknown norm kind {kind!r}")


def grad_norm_sq(f: SlabFunction) -> float:
    """Squared L^2 norm of the gradient, via the multiplier |xi|^2 + (k pi/H)^2."""
    if f.layers:
        raise ValueError("gradient norm needs a band-limited (cosine) field")
    grid = f.grid
    coeffs = f.cosine_coefficients()
    mult = grid.boundary.xi_sq[..., None] + grid.mu
    total = np.sum(mult * grid.cos_weights * np.abs(coeffs) ** 2)
    return float(grid.boundary.freq_weight * total)


# ---------------------------------------------------------------------------
# serialization


def save_csv(g, path) -> None:
    """Write samples as rows ``index..., re, im``."""
    values = g.values
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"i{k}" for k in range(values.ndim)] + ["re", "im"]
        writer.writerow(header)
        for idx in np.ndindex(values.shape):
            val = values[idx]
            writer.writerow(list(idx) + [repr(float(val.real)), repr(float(val.imag))])


def load_csv(grid, path, space: str = "node"):
    """Read a function written by :func:`save_csv` back onto ``grid``."""
    shape = grid.shape
    values = np.zeros(shape, dtype=complex)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            idx = tuple(int(x) for x in row[:-2])
            values[idx] = float(row[-2]) + 1j * float(row[-1])
    if isinstance(grid, SlabGrid):
        return SlabFunction(grid, values)
    return GridFunction(grid, values, space)


def save_binary(g, path) -> None:
    """Little-endian float64 dump, row-major, re/im interleaved per sample."""
    stacked = np.stack([g.values.real, g.values.imag], axis=-1)
    stacked.astype("<f8").tofile(path)


def load_binary(grid, path, space: str = "node"):
    raw = np.fromfile(path, dtype="<f8")
    shape = grid.shape
    raw = raw.reshape(shape + (2,))
    values = raw[..., 0] + 1j * raw[..., 1]
    if isinstance(grid, SlabGrid):
        return SlabFunction(grid, values)
    return GridFunction(grid, values, space)


def save_slab_slices(u: SlabFunction, heights, path) -> None:
    """CSV slices of a slab field at fixed heights (nearest collocation node)."""
    grid = u.grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"i{k}" for k in range(grid.boundary.ndim)] + ["z", "re", "im"])
        for height in heights:
            j = int(np.argmin(np.abs(grid.z_nodes - height)))
            sl = u.values[..., j]
            for idx in np.ndindex(sl.shape):
                val = sl[idx]
                writer.writerow(
                    list(idx)
                    + [repr(float(grid.z_nodes[j])), repr(float(val.real)), repr(float(val.imag))]
                )
