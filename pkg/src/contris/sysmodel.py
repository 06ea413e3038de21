"""Physical system model: surface geometry, spatial correlation, link budget,
base-station array and the derived direct-channel correlation matrix.

Conventions
-----------
* Distances entering the correlation models are measured in carrier
  wavelengths, so a scaling of kappa = 1 reproduces the classical
  half-wavelength decorrelation of isotropic scattering.
* The antenna array is a planar grid in a vertical plane, rows along x and
  columns along z, spaced ``spacing_wavelengths`` apart.  The arrival phase
  ramp uses elevation theta (from zenith) and azimuth phi.
* Gains are linear throughout; dB conversion happens at the config boundary.

All types are frozen dataclasses and all operations are pure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CovarianceRepairFailure, DegenerateGeometry, DomainError
from .specfun import bessel_j0, sinc_norm

__all__ = [
    "CorrelationKind",
    "SurfaceGeometry",
    "IsotropicCorrelation",
    "LinkBudget",
    "BsArrayConfig",
    "SystemConfig",
    "LinkDistances",
    "ChannelGains",
    "derive_link_distances",
    "path_loss_gain",
    "correlation_at",
    "steering_vector",
    "bs_correlation_matrix",
    "derive_gains",
    "clipped_eigh",
    "psd_repair",
]


class CorrelationKind(str, enum.Enum):
    SINC = "sinc"
    JAKES = "jakes"


@dataclass(frozen=True)
class SurfaceGeometry:
    """Rectangular surface of width W and height H, in meters."""

    width_m: float
    height_m: float

    def __post_init__(self):
        if not (self.width_m > 0.0 and self.height_m > 0.0):
            raise DomainError("surface dimensions must be positive")

    @property
    def area_m2(self) -> float:
        return self.width_m * self.height_m

    @property
    def diagonal_m(self) -> float:
        return math.hypot(self.width_m, self.height_m)

    def canonical(self) -> tuple[float, float]:
        """Dimensions ordered as (long side, short side).

        The isotropic moment formulas assume H <= W; the orientation of the
        rectangle is irrelevant to every distance-based statistic.
        """
        if self.width_m >= self.height_m:
            return self.width_m, self.height_m
        return self.height_m, self.width_m


@dataclass(frozen=True)
class IsotropicCorrelation:
    """Isotropic spatial correlation, either sinc or Jakes shaped.

    kappa = 0 degenerates to perfect correlation (rho identically 1).
    """

    kind: CorrelationKind
    kappa: float
    wavelength_m: float

    def __post_init__(self):
        if self.kappa < 0.0:
            raise DomainError("kappa must be >= 0")
        if not self.wavelength_m > 0.0:
            raise DomainError("wavelength must be positive")

    def rho(self, r_m):
        """Correlation coefficient at separation r_m (meters); vectorized."""
        d = np.asarray(r_m, dtype=float) / self.wavelength_m
        if self.kind is CorrelationKind.SINC:
            out = sinc_norm(2.0 * self.kappa * d)
        else:
            out = bessel_j0(2.0 * math.pi * self.kappa * d)
        return out if np.ndim(r_m) else float(out)


@dataclass(frozen=True)
class LinkBudget:
    """Path-loss model beta = c0 * (d / d0)^(-alpha) plus the node layout.

    The BS sits at the origin of a baseline running to the surface at
    distance ``d_rb_m``; the terminal is offset ``d_x_m`` along the baseline
    and ``d_y_m`` perpendicular to it.
    """

    c0: float = 1e-3
    d0_m: float = 1.0
    alpha_d: float = 6.0
    alpha_rb: float = 1.7
    alpha_ur: float = 1.7
    d_rb_m: float = 5.0
    d_x_m: float = 30.0
    d_y_m: float = 1.0

    def __post_init__(self):
        if not (self.c0 > 0.0 and self.d0_m > 0.0):
            raise DomainError("c0 and d0_m must be positive")
        if min(self.alpha_d, self.alpha_rb, self.alpha_ur) < 0.0:
            raise DomainError("path-loss exponents must be >= 0")
        if min(self.d_rb_m, self.d_x_m, self.d_y_m) < 0.0:
            raise DomainError("layout distances must be >= 0")


@dataclass(frozen=True)
class BsArrayConfig:
    """Vertical uniform rectangular array at the base station."""

    m_x: int = 8
    m_z: int = 4
    spacing_wavelengths: float = 0.5
    theta_a_rad: float = math.pi / 2.0
    phi_a_rad: float = math.pi / 4.0

    def __post_init__(self):
        if self.m_x < 1 or self.m_z < 1:
            raise DomainError("antenna counts must be >= 1")
        if not self.spacing_wavelengths > 0.0:
            raise DomainError("antenna spacing must be positive")
        if not 0.0 <= self.theta_a_rad <= math.pi:
            raise DomainError("elevation must lie in [0, pi]")
        if not -math.pi < self.phi_a_rad <= math.pi:
            raise DomainError("azimuth must lie in (-pi, pi]")

    @property
    def m(self) -> int:
        return self.m_x * self.m_z


@dataclass(frozen=True)
class SystemConfig:
    """Complete single-terminal system description."""

    geometry: SurfaceGeometry
    correlation: IsotropicCorrelation
    bs_correlation: IsotropicCorrelation
    link: LinkBudget
    array: BsArrayConfig
    transmit_snr: float

    def __post_init__(self):
        if not self.transmit_snr > 0.0:
            raise DomainError("transmit_snr must be positive")


@dataclass(frozen=True)
class LinkDistances:
    d_d: float
    d_ur: float
    d_rb: float


@dataclass(frozen=True)
class ChannelGains:
    beta_d: float
    beta_rb: float
    beta_ur: float


def derive_link_distances(link: LinkBudget) -> LinkDistances:
    """Direct and surface-terminal distances implied by the layout."""
    d_d = math.hypot(link.d_x_m, link.d_y_m)
    d_ur = math.hypot(link.d_rb_m - link.d_x_m, link.d_y_m)
    if d_d == 0.0 or d_ur == 0.0:
        raise DegenerateGeometry("terminal coincides with BS or surface")
    return LinkDistances(d_d=d_d, d_ur=d_ur, d_rb=link.d_rb_m)


def path_loss_gain(c0: float, d0_m: float, d_m: float, alpha: float) -> float:
    """Linear gain c0 * (d / d0)^(-alpha); equals c0 at the reference distance."""
    if d_m <= 0.0:
        raise DegenerateGeometry("path loss undefined for nonpositive distance")
    return c0 * (d_m / d0_m) ** (-alpha)


def correlation_at(model: IsotropicCorrelation, r_m) -> float:
    """Correlation coefficient between two points separated by r_m meters."""
    return model.rho(r_m)


def _element_positions_wavelengths(array: BsArrayConfig) -> tuple[np.ndarray, np.ndarray]:
    # flat index p * m_z + q for row p (horizontal) and column q (vertical)
    p = np.repeat(np.arange(array.m_x), array.m_z)
    q = np.tile(np.arange(array.m_z), array.m_x)
    return p * array.spacing_wavelengths, q * array.spacing_wavelengths


def steering_vector(array: BsArrayConfig) -> np.ndarray:
    """Unit-modulus arrival phase ramp across the array; a^H a = M exactly."""
    x, z = _element_positions_wavelengths(array)
    phase = 2.0 * math.pi * (
        x * math.sin(array.theta_a_rad) * math.cos(array.phi_a_rad)
        + z * math.cos(array.theta_a_rad))
    return np.exp(1j * phase)


def clipped_eigh(matrix: np.ndarray, reject_ratio: float = 1e-6):
    """Eigendecompose a symmetric matrix and clamp negative eigenvalues to 0.

    Returns ``(eigvals_clipped, eigvecs, clipped_mass)``, where clipped_mass
    is the removed fraction of total absolute eigenvalue mass.  Raises
    :class:`CovarianceRepairFailure` when any eigenvalue is more negative
    than ``reject_ratio`` times the largest one, which indicates a genuinely
    indefinite model rather than roundoff.
    """
    sym = 0.5 * (matrix + matrix.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    largest = eigvals[-1]
    if largest <= 0.0:
        raise CovarianceRepairFailure("correlation matrix has no positive spectrum")
    if eigvals[0] < -reject_ratio * largest:
        raise CovarianceRepairFailure(
            f"eigenvalue {eigvals[0]:.3e} too negative relative to {largest:.3e}")
    total_mass = np.abs(eigvals).sum()
    clipped_mass = float(-eigvals[eigvals < 0.0].sum() / total_mass)
    return np.maximum(eigvals, 0.0), eigvecs, clipped_mass


def psd_repair(matrix: np.ndarray) -> np.ndarray:
    """Project a correlation matrix onto the PSD cone and restore its diagonal.

    Negative roundoff eigenvalues are clamped to zero and the unit diagonal
    is recovered by symmetric rescaling.
    """
    eigvals, eigvecs, _ = clipped_eigh(matrix)
    repaired = (eigvecs * eigvals) @ eigvecs.T
    d = np.sqrt(np.diag(repaired))
    repaired = repaired / np.outer(d, d)
    return 0.5 * (repaired + repaired.T)


def bs_correlation_matrix(array: BsArrayConfig, model: IsotropicCorrelation) -> np.ndarray:
    """Antenna correlation matrix from pairwise grid distances.

    Unit diagonal, exactly symmetric, PSD after clipping repair.
    """
    x, z = _element_positions_wavelengths(array)
    # grid distances in meters so the correlation model applies unchanged
    dx = (x[:, None] - x[None, :]) * model.wavelength_m
    dz = (z[:, None] - z[None, :]) * model.wavelength_m
    dist = np.hypot(dx, dz)
    corr = model.rho(dist)
    np.fill_diagonal(corr, 1.0)
    corr = 0.5 * (corr + corr.T)
    return psd_repair(corr)


def derive_gains(cfg: SystemConfig) -> ChannelGains:
    """Per-link gains from the layout distances and matching exponents."""
    dist = derive_link_distances(cfg.link)
    link = cfg.link
    return ChannelGains(
        beta_d=path_loss_gain(link.c0, link.d0_m, dist.d_d, link.alpha_d),
        beta_rb=path_loss_gain(link.c0, link.d0_m, dist.d_rb, link.alpha_rb),
        beta_ur=path_loss_gain(link.c0, link.d0_m, dist.d_ur, link.alpha_ur),
    )
