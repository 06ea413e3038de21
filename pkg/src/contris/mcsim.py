"""Monte Carlo oracle for the optimally phased surface.

The continuous surface is discretized at cell centers, the correlated
complex Gaussian field is drawn through an eigenfactor of the grid
covariance, and each replicate applies the SNR-optimal phase design, so
that the per-draw SNR reduces to a function of the aggregate amplitude Y,
the direct channel and the arrival steering vector.  No symbol-level
waveform is ever materialized.

Determinism contract: every replicate draws from its own substream seeded
by (master seed, replicate index), so results are a pure function of
(seed, config, grid, n) regardless of batching or scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CovarianceRepairFailure, DomainError
from .sysmodel import (
    IsotropicCorrelation,
    SurfaceGeometry,
    SystemConfig,
    clipped_eigh,
    derive_gains,
    bs_correlation_matrix,
    steering_vector,
)

__all__ = [
    "GridSpec",
    "FieldSampler",
    "PhaseProfile",
    "ReplicateBatch",
    "BatchSummary",
    "EmpiricalCdf",
    "make_grid",
    "suggest_grid",
    "grid_points",
    "build_surface_covariance",
    "sample_field",
    "compute_Y",
    "sample_direct_channel",
    "optimal_phase_profile",
    "optimal_snr_sample",
    "snr_norm_form",
    "snr_under_profile",
    "run_replicates",
    "empirical_cdf",
]

_SQRT_HALF = 1.0 / math.sqrt(2.0)

# eigenvalues below this fraction of the largest carry only roundoff noise;
# dropping them keeps the factor rank small without moving the covariance
# beyond the 1e-10 reconstruction contract
_RANK_TRUNCATION = 1e-13

_CLIPPED_MASS_LIMIT = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Cell-centered discretization of the surface."""

    nx: int
    ny: int
    cell_area: float

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise DomainError("grid must have at least 2 points per axis")
        if not self.cell_area > 0.0:
            raise DomainError("cell_area must be positive")

    @property
    def n_points(self) -> int:
        return self.nx * self.ny


def make_grid(geom: SurfaceGeometry, nx: int, ny: int) -> GridSpec:
    """Grid of nx * ny cells covering the surface."""
    return GridSpec(nx=nx, ny=ny, cell_area=geom.area_m2 / (nx * ny))


def suggest_grid(
    geom: SurfaceGeometry,
    model: IsotropicCorrelation,
    cell_fraction: float = 0.25,
    min_side: int = 8,
    max_side: int = 256,
) -> GridSpec:
    """Grid whose cells resolve the correlation length of the field.

    Cells are kept below ``cell_fraction`` of the effective correlation
    period (wavelength / kappa) per axis.  Perfect correlation needs no
    resolution, so kappa = 0 returns the minimum grid.
    """
    def side(length: float) -> int:
        if model.kappa <= 0.0:
            return min_side
        target = cell_fraction * model.wavelength_m / model.kappa
        return min(max(min_side, math.ceil(length / target)), max_side)

    return make_grid(geom, side(geom.width_m), side(geom.height_m))


def grid_points(geom: SurfaceGeometry, grid: GridSpec) -> np.ndarray:
    """Cell-center coordinates, shape (n_points, 2), x-major order."""
    xs = (np.arange(grid.nx) + 0.5) * geom.width_m / grid.nx
    ys = (np.arange(grid.ny) + 0.5) * geom.height_m / grid.ny
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class FieldSampler:
    """Factorized covariance of the surface field on a grid.

    ``factor`` satisfies factor @ factor^T ~= beta_ur * Sigma with exact
    per-point marginal variance beta_ur.
    """

    factor: np.ndarray
    grid: GridSpec
    clipped_mass: float

    @property
    def n_points(self) -> int:
        return self.factor.shape[0]

    @property
    def rank(self) -> int:
        return self.factor.shape[1]


def _unit_factor(corr: np.ndarray) -> tuple[np.ndarray, float]:
    """Real factor L with L L^T ~= corr and exactly unit row power."""
    eigvals, eigvecs, clipped_mass = clipped_eigh(corr)
    if clipped_mass > _CLIPPED_MASS_LIMIT:
        raise CovarianceRepairFailure(
            f"clipped eigenvalue mass {clipped_mass:.3e} exceeds "
            f"{_CLIPPED_MASS_LIMIT:.0e}")
    keep = eigvals > _RANK_TRUNCATION * eigvals[-1]
    factor = eigvecs[:, keep] * np.sqrt(eigvals[keep])
    row_power = (factor * factor).sum(axis=1)
    if np.any(row_power <= 0.0):
        raise CovarianceRepairFailure("a grid point lost all covariance mass")
    factor /= np.sqrt(row_power)[:, None]
    return factor, clipped_mass


def build_surface_covariance(
    geom: SurfaceGeometry,
    grid: GridSpec,
    model: IsotropicCorrelation,
    beta_ur: float,
) -> FieldSampler:
    """Correlation matrix of the grid points, repaired and factorized."""
    if not beta_ur > 0.0:
        raise DomainError("beta_ur must be positive")
    pts = grid_points(geom, grid)
    dist = np.hypot(pts[:, 0, None] - pts[None, :, 0],
                    pts[:, 1, None] - pts[None, :, 1])
    corr = np.asarray(model.rho(dist), dtype=float)
    np.fill_diagonal(corr, 1.0)
    factor, clipped_mass = _unit_factor(corr)
    return FieldSampler(factor=factor * math.sqrt(beta_ur), grid=grid,
                        clipped_mass=clipped_mass)


def _complex_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Circular complex Gaussian, unit variance (1/2 per component)."""
    pair = rng.standard_normal((size, 2))
    return (pair[:, 0] + 1j * pair[:, 1]) * _SQRT_HALF


def sample_field(sampler: FieldSampler, rng: np.random.Generator) -> np.ndarray:
    """One draw of the surface field on the grid; marginals CN(0, beta_ur)."""
    return sampler.factor @ _complex_normal(rng, sampler.rank)


def compute_Y(field: np.ndarray, grid: GridSpec) -> float:
    """Riemann sum of the field magnitude over the surface."""
    if field.size != grid.n_points:
        raise DomainError("field size does not match the grid")
    return float(grid.cell_area * np.abs(field).sum())


def sample_direct_channel(
    r_d: np.ndarray, beta_d: float, rng: np.random.Generator,
) -> np.ndarray:
    """One draw of the direct channel, CN(0, beta_d * R_d).

    Convenience wrapper that factorizes on each call; the replicate loop
    factorizes once instead.
    """
    factor, _ = _unit_factor(np.asarray(r_d, dtype=float))
    return math.sqrt(beta_d) * (factor @ _complex_normal(rng, factor.shape[1]))


@dataclass(frozen=True)
class PhaseProfile:
    """Surface reflection phases under the SNR-optimal design."""

    omega: complex
    phases: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        if abs(abs(self.omega) - 1.0) > 1e-9:
            raise DomainError("omega must have unit modulus")
        if np.max(np.abs(np.abs(self.phases) - 1.0)) > 1e-9:
            raise DomainError("profile entries must have unit modulus")


def optimal_phase_profile(
    field: np.ndarray, h_d: np.ndarray, a_b: np.ndarray,
) -> PhaseProfile:
    """SNR-maximizing profile: cancel the field phase, align with the
    direct channel's projection on the steering vector.

    The projection being exactly zero is a probability-zero event; the
    profile then falls back to omega = 1 and is flagged degenerate.
    """
    proj = complex(np.vdot(a_b, h_d))
    if abs(proj) == 0.0:
        omega, degenerate = 1.0 + 0.0j, True
    else:
        omega, degenerate = proj / abs(proj), False
    phases = omega * np.exp(-1j * np.angle(field))
    return PhaseProfile(omega=omega, phases=phases, degenerate=degenerate)


def optimal_snr_sample(
    h_d: np.ndarray, y: float, a_b: np.ndarray, cfg: SystemConfig,
) -> float:
    """Post-design SNR for one channel draw, in expanded form."""
    if y < 0.0:
        raise DomainError("Y must be >= 0")
    beta_rb = derive_gains(cfg).beta_rb
    m = a_b.size
    hd_power = float(np.real(np.vdot(h_d, h_d)))
    proj_mag = abs(complex(np.vdot(a_b, h_d)))
    return cfg.transmit_snr * (
        hd_power + m * beta_rb * y * y + 2.0 * math.sqrt(beta_rb) * y * proj_mag)


def snr_norm_form(
    h_d: np.ndarray, y: float, a_b: np.ndarray, cfg: SystemConfig,
) -> float:
    """Same SNR as the squared norm of the aligned effective channel.

    Algebraically identical to :func:`optimal_snr_sample`; kept separate as
    a per-sample cross-check of the expansion.
    """
    beta_rb = derive_gains(cfg).beta_rb
    proj = complex(np.vdot(a_b, h_d))
    omega = proj / abs(proj) if abs(proj) > 0.0 else 1.0 + 0.0j
    h = h_d + math.sqrt(beta_rb) * a_b * (y * omega)
    return cfg.transmit_snr * float(np.real(np.vdot(h, h)))


def snr_under_profile(
    field: np.ndarray,
    h_d: np.ndarray,
    a_b: np.ndarray,
    phases: np.ndarray,
    cfg: SystemConfig,
    grid: GridSpec,
) -> float:
    """SNR achieved by an arbitrary unit-modulus reflection profile."""
    beta_rb = derive_gains(cfg).beta_rb
    reflected = grid.cell_area * np.sum(phases * field)
    h = h_d + math.sqrt(beta_rb) * a_b * reflected
    return cfg.transmit_snr * float(np.real(np.vdot(h, h)))


@dataclass(frozen=True)
class BatchSummary:
    mean_snr: float
    se_mean_snr: float
    var_snr: float
    mean_y: float
    se_mean_y: float
    var_y: float
    mean_se_bits: float
    se_mean_se_bits: float


@dataclass(frozen=True)
class ReplicateBatch:
    """Monte Carlo samples of (Y, SNR) with their master seed."""

    n: int
    snr_samples: np.ndarray
    y_samples: np.ndarray
    seed: int

    def __post_init__(self):
        if self.n != self.snr_samples.size or self.n != self.y_samples.size:
            raise DomainError("sample arrays must have length n")
        if not (np.all(np.isfinite(self.snr_samples))
                and np.all(np.isfinite(self.y_samples))):
            raise DomainError("samples must be finite")
        if self.snr_samples.min(initial=0.0) < 0.0 or self.y_samples.min(initial=0.0) < 0.0:
            raise DomainError("samples must be nonnegative")

    def se_samples(self) -> np.ndarray:
        """Per-replicate spectral efficiency log2(1 + SNR)."""
        return np.log2(1.0 + self.snr_samples)

    def summaries(self) -> BatchSummary:
        """Estimator summaries, recomputed from the stored samples."""
        snr = self.snr_samples
        y = self.y_samples
        se = self.se_samples()
        sqrt_n = math.sqrt(self.n)
        return BatchSummary(
            mean_snr=float(snr.mean()),
            se_mean_snr=float(snr.std(ddof=1) / sqrt_n),
            var_snr=float(snr.var(ddof=1)),
            mean_y=float(y.mean()),
            se_mean_y=float(y.std(ddof=1) / sqrt_n),
            var_y=float(y.var(ddof=1)),
            mean_se_bits=float(se.mean()),
            se_mean_se_bits=float(se.std(ddof=1) / sqrt_n),
        )


def _replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Substream for one replicate, a pure function of (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


# Replicates are processed in fixed-width blocks (the last one zero-padded)
# so that every replicate's arithmetic runs through identically shaped BLAS
# calls at a position determined only by its index.  Results are therefore
# bit-identical regardless of n or of how blocks are scheduled.
_BLOCK = 256


def run_replicates(
    cfg: SystemConfig, grid: GridSpec, n: int, seed: int,
) -> ReplicateBatch:
    """Draw n independent (field, direct channel) pairs and score them.

    Per-replicate draw order is fixed (field first, then direct channel),
    and each replicate consumes only its own substream, so the batch is a
    pure function of (seed, cfg, grid, n) and prefixes agree across
    different n.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if seed < 0:
        raise DomainError("seed must be a nonnegative integer")
    if abs(grid.cell_area * grid.n_points - cfg.geometry.area_m2) > 1e-9 * cfg.geometry.area_m2:
        raise DomainError("grid does not cover the configured surface")

    gains = derive_gains(cfg)
    sampler = build_surface_covariance(cfg.geometry, grid, cfg.correlation, gains.beta_ur)
    r_d = bs_correlation_matrix(cfg.array, cfg.bs_correlation)
    direct_factor, _ = _unit_factor(r_d)
    direct_factor = direct_factor * math.sqrt(gains.beta_d)
    a_b = steering_vector(cfg.array)
    m = cfg.array.m

    rank_f = sampler.rank
    rank_d = direct_factor.shape[1]

    y = np.empty(n)
    hd_power = np.empty(n)
    proj_mag = np.empty(n)

    zf = np.zeros((rank_f, _BLOCK), dtype=complex)
    zd = np.zeros((rank_d, _BLOCK), dtype=complex)
    for start in range(0, n, _BLOCK):
        count = min(_BLOCK, n - start)
        zf[:, count:] = 0.0
        zd[:, count:] = 0.0
        for j in range(count):
            rng = _replicate_rng(seed, start + j)
            zf[:, j] = _complex_normal(rng, rank_f)
            zd[:, j] = _complex_normal(rng, rank_d)
        # two real products per complex one: avoids upcasting the factors
        field_re = sampler.factor @ zf.real
        field_im = sampler.factor @ zf.imag
        y[start:start + count] = (
            sampler.grid.cell_area
            * np.hypot(field_re, field_im).sum(axis=0)[:count])
        h_d = direct_factor @ zd.real + 1j * (direct_factor @ zd.imag)
        hd_power[start:start + count] = (np.abs(h_d) ** 2).sum(axis=0)[:count]
        proj_mag[start:start + count] = np.abs(a_b.conj() @ h_d)[:count]

    snr = cfg.transmit_snr * (
        hd_power + m * gains.beta_rb * y * y
        + 2.0 * math.sqrt(gains.beta_rb) * y * proj_mag)
    return ReplicateBatch(n=n, snr_samples=snr, y_samples=y, seed=seed)


class EmpiricalCdf:
    """Right-continuous empirical CDF of a sample."""

    def __init__(self, samples: np.ndarray):
        if samples.size == 0:
            raise DomainError("empirical CDF needs at least one sample")
        self.sorted = np.sort(np.asarray(samples, dtype=float))
        self.n = self.sorted.size

    def __call__(self, x):
        idx = np.searchsorted(self.sorted, np.asarray(x, dtype=float), side="right")
        out = idx / self.n
        return float(out) if np.ndim(x) == 0 else out

    def ks_distance(self, cdf) -> float:
        """Kolmogorov-Smirnov distance to a continuous CDF callable."""
        ref = np.asarray(cdf(self.sorted), dtype=float)
        steps = np.arange(1, self.n + 1) / self.n
        return float(max(np.max(steps - ref), np.max(ref - (steps - 1.0 / self.n))))


def empirical_cdf(batch: ReplicateBatch) -> EmpiricalCdf:
    """Empirical CDF of the batch SNR samples."""
    return EmpiricalCdf(batch.snr_samples)
