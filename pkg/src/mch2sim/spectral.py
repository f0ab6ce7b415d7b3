"""Fourier representation of real scalar fields on the torus T^d = (R/2piZ)^d.

Conventions (used consistently by every module):

- Fourier coefficients are normalized as a_m = (2pi)^{-d} (f, e_{-m})_{L2},
  so that f(x) = sum_m a_m exp(i m.x).  Numerically a_m = FFT(f)/N^d.
- ||f||_{H^s}^2 = sum_m (1+|m|^2)^s |a_m|^2  (coefficient-sum convention).
  Physical integrals, when needed (H^1 energy, breaking threshold), are
  computed by the exact trapezoid rule (2pi/N)^d sum f(x_j) and differ from
  the coefficient convention by (2pi)^d; the two are never mixed inside one
  inequality.
- Quadratic nonlinearities are dealiased by 2/3-rule box truncation: after
  every pointwise product, coefficients with any |m_i| > K are zeroed,
  K = floor(dealias_fraction * n/2).  For power-of-two n this leaves the
  retained band alias-free for quadratic products.

Fields are stored in numpy rfft layout (real-to-complex), which encodes the
Hermitian symmetry a_{-m} = conj(a_m) structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Collocation grid for T^d, d in {1, 2}, with 2/3-rule dealiasing."""

    d: int
    n_per_dim: int
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if self.n_per_dim < 8 or not _is_power_of_two(self.n_per_dim):
            raise ValueError(
                f"n_per_dim must be a power of two >= 8, got {self.n_per_dim}"
            )
        if self.cutoff < 2:
            raise ValueError(
                f"retained-mode cutoff K = {self.cutoff} < 2; increase n_per_dim"
            )

    @property
    def cutoff(self) -> int:
        """Retained-mode cutoff K: modes with any |m_i| > K are dealiased."""
        return int(np.floor(self.dealias_fraction * self.n_per_dim / 2))

    @property
    def shape(self) -> tuple:
        return (self.n_per_dim,) * self.d

    @property
    def spectral_shape(self) -> tuple:
        n = self.n_per_dim
        return (n // 2 + 1,) if self.d == 1 else (n, n // 2 + 1)

    @cached_property
    def wavenumbers(self) -> tuple:
        """Integer mode arrays m_j broadcast over the rfft layout.

        Nyquist entries are kept in the mode arrays (they matter for |m|^2
        weights) but are zeroed in derivative multipliers, see `deriv_factor`.
        """
        n = self.n_per_dim
        half = np.arange(n // 2 + 1)
        if self.d == 1:
            return (half.astype(float),)
        full = np.fft.fftfreq(n, d=1.0 / n)  # integer-valued
        return (full[:, None].astype(float), half[None, :].astype(float))

    @cached_property
    def modes_sq(self) -> np.ndarray:
        return sum(k * k for k in self.wavenumbers)

    @cached_property
    def deriv_factor(self) -> tuple:
        """i*m_j multipliers with Nyquist modes zeroed (keeps fields real)."""
        n = self.n_per_dim
        out = []
        for k in self.wavenumbers:
            k = k.copy()
            k[np.abs(k) == n // 2] = 0.0
            out.append(1j * k)
        return tuple(out)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        K = self.cutoff
        mask = np.ones(self.spectral_shape, dtype=bool)
        for k in self.wavenumbers:
            mask &= np.abs(k) <= K
        return mask

    @cached_property
    def hermitian_weight(self) -> np.ndarray:
        """Multiplicity of each stored coefficient in the full spectrum.

        The rfft layout stores only m_last >= 0; every coefficient with
        0 < m_last < n/2 represents itself and its conjugate partner.
        """
        n = self.n_per_dim
        w = np.full(self.spectral_shape, 2.0)
        if self.d == 1:
            w[0] = 1.0
            w[-1] = 1.0
        else:
            w[:, 0] = 1.0
            w[:, -1] = 1.0
        return w

    def points(self) -> tuple:
        """Collocation coordinates x_k = 2 pi k / n per dimension."""
        x = 2.0 * np.pi * np.arange(self.n_per_dim) / self.n_per_dim
        if self.d == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    @property
    def cell_volume(self) -> float:
        return (2.0 * np.pi / self.n_per_dim) ** self.d


@dataclass(frozen=True)
class SpectralField:
    """Real scalar field on a Grid, held as normalized rfft coefficients."""

    grid: Grid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.coeffs.shape != self.grid.spectral_shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid "
                f"{self.grid.spectral_shape}"
            )
        self.coeffs.flags.writeable = False

    def values(self) -> np.ndarray:
        return to_physical(self)


def from_physical(grid: Grid, values: np.ndarray) -> SpectralField:
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"value shape {values.shape} != grid shape {grid.shape}")
    coeffs = np.fft.rfftn(values) / values.size
    return SpectralField(grid, coeffs)


def to_physical(f: SpectralField) -> np.ndarray:
    n_total = f.grid.n_per_dim ** f.grid.d
    return np.fft.irfftn(f.coeffs * n_total, s=f.grid.shape)


def zero_field(grid: Grid) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.spectral_shape, dtype=complex))


def constant_field(grid: Grid, value: float) -> SpectralField:
    coeffs = np.zeros(grid.spectral_shape, dtype=complex)
    coeffs[(0,) * grid.d] = value
    return SpectralField(grid, coeffs)


def field_from_modes(grid: Grid, modes: dict) -> SpectralField:
    """Build a field from {m: a_m} with Hermitian completion.

    Keys are ints (d=1) or int tuples (d=2); for every mode given, the
    conjugate coefficient at -m is implied.  A mode and its negative must
    not both be listed.
    """
    n = grid.n_per_dim
    coeffs = np.zeros(grid.spectral_shape, dtype=complex)

    def put(m, amp):
        m = (m,) if np.isscalar(m) else tuple(m)
        if len(m) != grid.d:
            raise ValueError(f"mode {m} has wrong dimension")
        if any(abs(mi) > n // 2 for mi in m):
            raise ValueError(f"mode {m} outside resolved band")
        if m[-1] < 0 or (m[-1] == 0 and grid.d == 2 and m[0] < 0):
            m = tuple(-mi for mi in m)
            amp = np.conj(amp)
        idx = m[-1] if grid.d == 1 else (m[0] % n, m[-1])
        coeffs[idx] += amp
        # self-conjugate modes (DC / Nyquist-real line) must be real
        if all(mi % (n // 2) == 0 for mi in m):
            coeffs[idx] = coeffs[idx].real

    for m, amp in modes.items():
        put(m, amp)
    return SpectralField(grid, coeffs)


def random_field(
    grid: Grid,
    rng: np.random.Generator,
    kmax: int | None = None,
    decay: float = 1.0,
) -> SpectralField:
    """Random real field, band-limited to |m_i| <= kmax, coefficients damped
    by (1+|m|^2)^{-decay/2}."""
    kmax = grid.cutoff if kmax is None else kmax
    f = from_physical(grid, rng.standard_normal(grid.shape))
    damp = (1.0 + grid.modes_sq) ** (-decay / 2.0)
    for k in grid.wavenumbers:
        damp = damp * (np.abs(k) <= kmax)
    return SpectralField(grid, f.coeffs * damp)


def hermitian_defect(f: SpectralField) -> float:
    """Max deviation from a_{-m} = conj(a_m) (0 for genuinely real fields)."""
    c = f.coeffs
    if f.grid.d == 1:
        return max(abs(c[0].imag), abs(c[-1].imag))
    defect = 0.0
    for col in (0, c.shape[1] - 1):
        col_c = c[:, col]
        flipped = np.conj(np.roll(col_c[::-1], 1))
        defect = max(defect, float(np.max(np.abs(col_c - flipped))))
    return defect


# ---------------------------------------------------------------------------
# multipliers and norms


def bessel_potential(f: SpectralField, s: float) -> SpectralField:
    """Lambda^s f: multiply a_m by (1+|m|^2)^{s/2}."""
    return SpectralField(f.grid, f.coeffs * (1.0 + f.grid.modes_sq) ** (s / 2.0))


def sobolev_norm(f: SpectralField, s: float) -> float:
    w = f.grid.hermitian_weight * (1.0 + f.grid.modes_sq) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def l2_coeff_sq(f: SpectralField) -> float:
    """sum_m |a_m|^2 (the H^0 coefficient norm squared)."""
    return float(np.sum(f.grid.hermitian_weight * np.abs(f.coeffs) ** 2))


def integrate_physical(values: np.ndarray, grid: Grid) -> float:
    """Trapezoid-exact integral over T^d (exact for band-limited fields)."""
    return float(np.sum(values)) * grid.cell_volume


def gradient(f: SpectralField) -> tuple:
    return tuple(
        SpectralField(f.grid, f.coeffs * ik) for ik in f.grid.deriv_factor
    )


def divergence(v) -> SpectralField:
    grid = v[0].grid
    coeffs = sum(vi.coeffs * ik for vi, ik in zip(v, grid.deriv_factor))
    return SpectralField(grid, coeffs)


def dealiased_product(f: SpectralField, g: SpectralField) -> SpectralField:
    if f.grid is not g.grid and f.grid != g.grid:
        raise ValueError("fields must share one grid")
    prod = to_physical(f) * to_physical(g)
    out = np.fft.rfftn(prod) / prod.size
    out[~f.grid.dealias_mask] = 0.0
    return SpectralField(f.grid, out)


def dealias(grid: Grid, raw_coeffs: np.ndarray) -> np.ndarray:
    out = raw_coeffs.copy()
    out[~grid.dealias_mask] = 0.0
    return out


# ---------------------------------------------------------------------------
# Friedrichs mollifier


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """Quintic blend h with h(0)=0, h(1)=1 and two flat derivatives."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def mollifier_symbol_1d(xi: np.ndarray) -> np.ndarray:
    """Even symbol: 1 on |xi|<=1, 0 on |xi|>=2, quintic blend between."""
    a = np.abs(xi)
    out = np.ones_like(a)
    ramp = (a > 1.0) & (a < 2.0)
    out[ramp] = 1.0 - _smoothstep(a[ramp] - 1.0)
    out[a >= 2.0] = 0.0
    return out


def mollify(f: SpectralField, eps: float) -> SpectralField:
    """J_eps f: multiply a_m by the tensorized symbol jhat(eps*m)."""
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"mollifier scale must lie in (0,1], got {eps}")
    sym = np.ones(f.grid.spectral_shape)
    for k in f.grid.wavenumbers:
        sym = sym * mollifier_symbol_1d(eps * k)
    return SpectralField(f.grid, f.coeffs * sym)


# ---------------------------------------------------------------------------
# Littlewood-Paley blocks (sharp shells) and Besov norms


def lp_block(f: SpectralField, q: int) -> SpectralField:
    """Dyadic shell restriction: |m|<1 for q=-1, 2^{q-1}<=|m|<2^q for q>=0."""
    if q < -1:
        raise ValueError("block index must be >= -1")
    r = np.sqrt(f.grid.modes_sq)
    if q == -1:
        mask = r < 1.0
    else:
        mask = (r >= 2.0 ** (q - 1)) & (r < 2.0 ** q)
    return SpectralField(f.grid, np.where(mask, f.coeffs, 0.0))


def max_block_index(grid: Grid) -> int:
    rmax = np.sqrt(grid.d) * (grid.n_per_dim // 2)
    return int(np.ceil(np.log2(rmax))) + 1


def besov_norm(f: SpectralField, s: float, r: float) -> float:
    """||f||_{B^s_{2,r}} with the ell^r sum over 2^{sq} ||Delta_q f||_{L^2}.

    The block L^2 norm uses the coefficient convention, consistent with the
    H^s norm it is compared against.
    """
    terms = []
    for q in range(-1, max_block_index(f.grid) + 1):
        nq = np.sqrt(l2_coeff_sq(lp_block(f, q)))
        terms.append(2.0 ** (s * q) * nq)
    terms = np.array(terms)
    if np.isinf(r):
        return float(np.max(terms))
    return float(np.sum(terms ** r) ** (1.0 / r))


# ---------------------------------------------------------------------------
# oversampled evaluation (steep-slope diagnostics)


def oversampled_values(f: SpectralField, factor: int = 4) -> np.ndarray:
    """Field values on a `factor`-times denser grid via spectral zero-padding."""
    n = f.grid.n_per_dim
    m = factor * n
    if f.grid.d == 1:
        fine = np.zeros(m // 2 + 1, dtype=complex)
        fine[: n // 2 + 1] = f.coeffs
        return np.fft.irfft(fine * m, n=m)
    fine = np.zeros((m, m // 2 + 1), dtype=complex)
    half = n // 2
    fine[:half, : n // 2 + 1] = f.coeffs[:half]
    fine[m - half :, : n // 2 + 1] = f.coeffs[half:]
    return np.fft.irfft2(fine * m * m, s=(m, m))


def evaluate_at_points(f: SpectralField, x: np.ndarray) -> np.ndarray:
    """Direct Fourier summation at arbitrary points (d=1 only)."""
    if f.grid.d != 1:
        raise ValueError("off-grid evaluation implemented for d=1 only")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = np.arange(f.grid.n_per_dim // 2 + 1)
    phase = np.exp(1j * np.outer(x, m))
    w = f.grid.hermitian_weight
    return (phase @ (w * f.coeffs)).real


# ---------------------------------------------------------------------------
# the simulated pair y = (u, gamma)


@dataclass(frozen=True)
class State:
    """Velocity components plus averaged-density deviation at one time.

    The momentum m = Lambda^2 u and density rho = Lambda^2 gamma are derived
    on demand, never stored.
    """

    u: tuple
    gamma: SpectralField

    def __post_init__(self):
        grid = self.gamma.grid
        if len(self.u) != grid.d:
            raise ValueError(f"expected {grid.d} velocity components")
        if any(ui.grid != grid for ui in self.u):
            raise ValueError("all fields must share one grid")

    @property
    def grid(self) -> Grid:
        return self.gamma.grid

    def momentum(self) -> tuple:
        return tuple(bessel_potential(ui, 2.0) for ui in self.u)

    def density(self) -> SpectralField:
        return bessel_potential(self.gamma, 2.0)


def zero_state(grid: Grid) -> State:
    return State(tuple(zero_field(grid) for _ in range(grid.d)), zero_field(grid))


def state_norm(y: State, s: float) -> float:
    """||y||_{H^s} with the Cartesian pair convention."""
    total = sum(sobolev_norm(ui, s) ** 2 for ui in y.u)
    total += sobolev_norm(y.gamma, s) ** 2
    return float(np.sqrt(total))


def winf_norm(y: State) -> float:
    """Discrete W^{1,inf} norm: sup over collocation points of all
    |u_i|, |gamma|, |d_j u_i|, |d_j gamma|."""
    best = 0.0
    for f in (*y.u, y.gamma):
        best = max(best, float(np.max(np.abs(to_physical(f)))))
        for g in gradient(f):
            best = max(best, float(np.max(np.abs(to_physical(g)))))
    return best


def scale_state(y: State, a: float) -> State:
    return State(
        tuple(SpectralField(y.grid, ui.coeffs * a) for ui in y.u),
        SpectralField(y.grid, y.gamma.coeffs * a),
    )


def add_states(y: State, z: State, b: float = 1.0) -> State:
    return State(
        tuple(
            SpectralField(y.grid, yu.coeffs + b * zu.coeffs)
            for yu, zu in zip(y.u, z.u)
        ),
        SpectralField(y.grid, y.gamma.coeffs + b * z.gamma.coeffs),
    )


def states_allclose(y: State, z: State, tol: float = 0.0) -> bool:
    fields = list(zip((*y.u, y.gamma), (*z.u, z.gamma)))
    return all(
        np.allclose(a.coeffs, b.coeffs, rtol=0.0, atol=tol) for a, b in fields
    )
