"""Batch front-end: load a JSON config, run the analytic and Monte Carlo
pipelines for a named scenario, and emit CSV with a provenance header.

Config schema (all keys optional; defaults reproduce the reference desk
setup, 5.8 GHz carrier, 8x4 half-wavelength array, indoor path-loss
exponents)::

    {
      "system": {
        "geometry": {"width_m": 0.6325, "height_m": 0.6325},
        "carrier_hz": 5.8e9,
        "correlation": {"kind": "jakes", "kappa": 1.0},
        "bs_correlation": {"kind": "jakes", "kappa": 1.0},
        "link": {"c0_db": -30.0, "d0_m": 1.0,
                 "alpha_d": 6.0, "alpha_rb": 1.7, "alpha_ur": 1.7,
                 "d_rb_m": 5.0, "d_x_m": 30.0, "d_y_m": 1.0},
        "array": {"m_x": 8, "m_z": 4, "spacing_wavelengths": 0.5,
                  "theta_a_rad": 1.5707963267948966,
                  "phi_a_rad": 0.7853981633974483},
        "transmit_snr_db": 120.0
      },
      "grid": {"nx": 32, "ny": 32},
      "replicates": 10000,
      "seed": 20260810,
      "sweep": {"areas_m2": [0.1, 0.2, 0.3, 0.4],
                "kappas": [0.0, 0.1, 0.5, 1.0],
                "aspects": [1.0, 20.0],
                "thresholds_db": [20.0, 21.0, "..."],
                "setups": ["A", "B", "C"]},
      "output_path": "results.csv"
    }

Gain-like fields accept either a linear key or a ``_db`` twin.  Scenarios:

* ``fig2``   mean SNR vs surface area, analytic vs Monte Carlo, both models
* ``fig3``   spectral-efficiency bound vs simulated mean rate over kappa/area
* ``fig4``   outage CDF, gamma approximation vs empirical, per area/aspect/model
* ``fig5``   channel-hardening CV^2 per layout setup, area and kappa
* ``table1`` bound vs dominant-error-term summary over kappa

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analytic import (
    YMoments,
    cv_squared,
    dominant_error_term,
    gamma_fit,
    mean_snr_from_terms,
    link_terms,
    moment_m1,
    moment_m2_iso,
    moment_m2_quad4,
    outage_probability,
    rect_distance_pdf,
    se_bound,
    second_moment_snr_from_terms,
)
from .errors import ConfigError, ContrisError
from .mcsim import (
    empirical_cdf,
    make_grid,
    optimal_snr_sample,
    run_replicates,
    sample_direct_channel,
    sample_field,
    compute_Y,
    snr_norm_form,
    build_surface_covariance,
    _replicate_rng,
)
from .quadrature import QuadratureSpec, integrate_piecewise
from .sysmodel import (
    BsArrayConfig,
    CorrelationKind,
    IsotropicCorrelation,
    LinkBudget,
    SurfaceGeometry,
    SystemConfig,
    bs_correlation_matrix,
    derive_gains,
    steering_vector,
)

SPEED_OF_LIGHT = 299792458.0
DEFAULT_CARRIER_HZ = 5.8e9

# layout presets {d_y, d_rb, d_x} in meters
SETUPS = {
    "A": (1.0, 40.0, 27.0),
    "B": (1.0, 40.0, 53.0),
    "C": (1.0, 5.0, 27.0),
}

SCENARIOS = ("fig2", "fig3", "fig4", "fig5", "table1")


@dataclass(frozen=True)
class SweepSpec:
    areas_m2: tuple = ()
    kappas: tuple = ()
    aspects: tuple = ()
    thresholds_db: tuple = ()
    setups: tuple = ()

    def __post_init__(self):
        if not any((self.areas_m2, self.kappas, self.aspects,
                    self.thresholds_db, self.setups)):
            raise ConfigError("sweep must define at least one parameter list")
        for name in self.setups:
            if name not in SETUPS and name != "custom":
                raise ConfigError(f"unknown setup {name!r}; expected A/B/C/custom")


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig
    grid: tuple  # (nx, ny) applied to each sweep geometry
    replicates: int
    seed: int
    sweep: SweepSpec
    output_path: str | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class ResultTable:
    columns: tuple
    rows: tuple
    provenance: dict


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


# --------------------------------------------------------------------------
# config loading
# --------------------------------------------------------------------------

def _db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _check_keys(section: dict, allowed: set, where: str):
    extra = set(section) - allowed
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)} in {where}")


def _gain_field(section: dict, key: str, default_linear: float) -> float:
    if key in section and f"{key}_db" in section:
        raise ConfigError(f"give either {key} or {key}_db, not both")
    if f"{key}_db" in section:
        return _db_to_linear(float(section[f"{key}_db"]))
    return float(section.get(key, default_linear))


def _correlation_from(section: dict, wavelength: float, where: str) -> IsotropicCorrelation:
    _check_keys(section, {"kind", "kappa"}, where)
    kind = str(section.get("kind", "jakes")).lower()
    try:
        kind = CorrelationKind(kind)
    except ValueError:
        raise ConfigError(f"correlation kind must be sinc or jakes, got {kind!r}")
    return IsotropicCorrelation(kind=kind, kappa=float(section.get("kappa", 1.0)),
                                wavelength_m=wavelength)


def default_system() -> SystemConfig:
    wavelength = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ
    return SystemConfig(
        geometry=SurfaceGeometry(width_m=math.sqrt(0.4), height_m=math.sqrt(0.4)),
        correlation=IsotropicCorrelation(CorrelationKind.JAKES, 1.0, wavelength),
        bs_correlation=IsotropicCorrelation(CorrelationKind.JAKES, 1.0, wavelength),
        link=LinkBudget(),
        array=BsArrayConfig(),
        transmit_snr=1e12,
    )


def default_sweep() -> SweepSpec:
    return SweepSpec(
        areas_m2=(0.1, 0.2, 0.3, 0.4),
        kappas=(0.0, 0.1, 0.5, 1.0),
        aspects=(1.0, 20.0),
        thresholds_db=tuple(20.0 + 0.5 * i for i in range(41)),
        setups=("A", "B", "C"),
    )


def load_config(document: dict | None) -> ExperimentConfig:
    """Build an experiment config from a parsed JSON document."""
    doc = dict(document or {})
    _check_keys(doc, {"system", "grid", "replicates", "seed", "sweep", "output_path"},
                "top level")

    sys_doc = dict(doc.get("system", {}))
    _check_keys(sys_doc, {"geometry", "carrier_hz", "wavelength_m", "correlation",
                          "bs_correlation", "link", "array",
                          "transmit_snr", "transmit_snr_db"}, "system")
    if "wavelength_m" in sys_doc and "carrier_hz" in sys_doc:
        raise ConfigError("give either carrier_hz or wavelength_m, not both")
    if "wavelength_m" in sys_doc:
        wavelength = float(sys_doc["wavelength_m"])
    else:
        wavelength = SPEED_OF_LIGHT / float(sys_doc.get("carrier_hz", DEFAULT_CARRIER_HZ))

    geo_doc = dict(sys_doc.get("geometry", {}))
    _check_keys(geo_doc, {"width_m", "height_m"}, "system.geometry")
    geometry = SurfaceGeometry(
        width_m=float(geo_doc.get("width_m", math.sqrt(0.4))),
        height_m=float(geo_doc.get("height_m", math.sqrt(0.4))))

    link_doc = dict(sys_doc.get("link", {}))
    _check_keys(link_doc, {"c0", "c0_db", "d0_m", "alpha_d", "alpha_rb", "alpha_ur",
                           "d_rb_m", "d_x_m", "d_y_m"}, "system.link")
    link = LinkBudget(
        c0=_gain_field(link_doc, "c0", 1e-3),
        d0_m=float(link_doc.get("d0_m", 1.0)),
        alpha_d=float(link_doc.get("alpha_d", 6.0)),
        alpha_rb=float(link_doc.get("alpha_rb", 1.7)),
        alpha_ur=float(link_doc.get("alpha_ur", 1.7)),
        d_rb_m=float(link_doc.get("d_rb_m", 5.0)),
        d_x_m=float(link_doc.get("d_x_m", 30.0)),
        d_y_m=float(link_doc.get("d_y_m", 1.0)))

    arr_doc = dict(sys_doc.get("array", {}))
    _check_keys(arr_doc, {"m_x", "m_z", "spacing_wavelengths",
                          "theta_a_rad", "phi_a_rad"}, "system.array")
    array = BsArrayConfig(
        m_x=int(arr_doc.get("m_x", 8)),
        m_z=int(arr_doc.get("m_z", 4)),
        spacing_wavelengths=float(arr_doc.get("spacing_wavelengths", 0.5)),
        theta_a_rad=float(arr_doc.get("theta_a_rad", math.pi / 2.0)),
        phi_a_rad=float(arr_doc.get("phi_a_rad", math.pi / 4.0)))

    system = SystemConfig(
        geometry=geometry,
        correlation=_correlation_from(dict(sys_doc.get("correlation", {})),
                                      wavelength, "system.correlation"),
        bs_correlation=_correlation_from(dict(sys_doc.get("bs_correlation",
                                                          sys_doc.get("correlation", {}))),
                                         wavelength, "system.bs_correlation"),
        link=link,
        array=array,
        transmit_snr=_gain_field(sys_doc, "transmit_snr", 1e12))

    grid_doc = dict(doc.get("grid", {}))
    _check_keys(grid_doc, {"nx", "ny"}, "grid")
    grid = (int(grid_doc.get("nx", 32)), int(grid_doc.get("ny", 32)))
    if min(grid) < 2:
        raise ConfigError("grid must have at least 2 points per axis")

    if "sweep" in doc:
        sweep_doc = dict(doc["sweep"])
        _check_keys(sweep_doc, {"areas_m2", "kappas", "aspects",
                                "thresholds_db", "setups"}, "sweep")
        sweep = SweepSpec(
            areas_m2=tuple(float(v) for v in sweep_doc.get("areas_m2", ())),
            kappas=tuple(float(v) for v in sweep_doc.get("kappas", ())),
            aspects=tuple(float(v) for v in sweep_doc.get("aspects", ())),
            thresholds_db=tuple(float(v) for v in sweep_doc.get("thresholds_db", ())),
            setups=tuple(str(v) for v in sweep_doc.get("setups", ())))
    else:
        sweep = default_sweep()

    return ExperimentConfig(
        system=system,
        grid=grid,
        replicates=int(doc.get("replicates", 10000)),
        seed=int(doc.get("seed", 20260810)),
        sweep=sweep,
        output_path=doc.get("output_path"))


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Resolved configuration as plain JSON-serializable types."""
    s = cfg.system
    return {
        "system": {
            "geometry": {"width_m": s.geometry.width_m, "height_m": s.geometry.height_m},
            "wavelength_m": s.correlation.wavelength_m,
            "correlation": {"kind": s.correlation.kind.value, "kappa": s.correlation.kappa},
            "bs_correlation": {"kind": s.bs_correlation.kind.value,
                               "kappa": s.bs_correlation.kappa},
            "link": dataclasses.asdict(s.link),
            "array": dataclasses.asdict(s.array),
            "transmit_snr": s.transmit_snr,
        },
        "grid": {"nx": cfg.grid[0], "ny": cfg.grid[1]},
        "replicates": cfg.replicates,
        "seed": cfg.seed,
        "sweep": dataclasses.asdict(cfg.sweep),
        "output_path": cfg.output_path,
    }


def config_hash(cfg: ExperimentConfig) -> str:
    doc = config_to_dict(cfg)
    doc.pop("output_path", None)  # the destination does not shape the numbers
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# --------------------------------------------------------------------------
# scenario helpers
# --------------------------------------------------------------------------

def _square_geometry(area: float, aspect: float = 1.0) -> SurfaceGeometry:
    width = math.sqrt(aspect * area)
    return SurfaceGeometry(width_m=width, height_m=area / width)


def _with_kappa(system: SystemConfig, kappa: float) -> SystemConfig:
    return dataclasses.replace(
        system,
        correlation=dataclasses.replace(system.correlation, kappa=kappa),
        bs_correlation=dataclasses.replace(system.bs_correlation, kappa=kappa))


def _with_model(system: SystemConfig, kind: CorrelationKind) -> SystemConfig:
    return dataclasses.replace(
        system,
        correlation=dataclasses.replace(system.correlation, kind=kind),
        bs_correlation=dataclasses.replace(system.bs_correlation, kind=kind))


def _with_setup(system: SystemConfig, name: str) -> SystemConfig:
    if name == "custom":
        return system
    d_y, d_rb, d_x = SETUPS[name]
    return dataclasses.replace(
        system,
        link=dataclasses.replace(system.link, d_y_m=d_y, d_rb_m=d_rb, d_x_m=d_x))


def _point_seed(master: int, salt: int, index: int) -> int:
    return int(np.random.SeedSequence((master, salt, index)).generate_state(1, np.uint64)[0])


def _snr_moments(system: SystemConfig, quad: QuadratureSpec = QuadratureSpec()):
    """Analytic (mu1, mu2) for one system point."""
    terms = link_terms(system)
    m1 = moment_m1(system.geometry, terms.beta_ur)
    m2 = moment_m2_iso(system.geometry, system.correlation, terms.beta_ur, quad)
    moments = YMoments.from_first_two(m1, m2)
    mu1 = mean_snr_from_terms(terms, m1, m2)
    mu2 = second_moment_snr_from_terms(terms, moments)
    return mu1, mu2


def _mc_batch(cfg: ExperimentConfig, system: SystemConfig, seed: int):
    grid = make_grid(system.geometry, cfg.grid[0], cfg.grid[1])
    return run_replicates(system, grid, cfg.replicates, seed)


def _provenance(cfg: ExperimentConfig) -> dict:
    return {"config_sha256": config_hash(cfg), "seed": cfg.seed, "version": __version__}


# --------------------------------------------------------------------------
# scenarios
# --------------------------------------------------------------------------

def _require(sweep_values, what: str, scenario: str):
    if not sweep_values:
        raise ConfigError(f"scenario {scenario} requires a {what} sweep")
    return sweep_values


def _run_fig2(cfg: ExperimentConfig) -> ResultTable:
    areas = _require(cfg.sweep.areas_m2, "areas_m2", "fig2")
    rows = []
    for i, area in enumerate(areas):
        for j, kind in enumerate((CorrelationKind.SINC, CorrelationKind.JAKES)):
            system = _with_model(dataclasses.replace(
                cfg.system, geometry=_square_geometry(area)), kind)
            mu1, _ = _snr_moments(system)
            batch = _mc_batch(cfg, system, _point_seed(cfg.seed, 2, 2 * i + j))
            summary = batch.summaries()
            rows.append((area, kind.value, mu1, summary.mean_snr, summary.se_mean_snr))
    return ResultTable(
        columns=("area", "model", "mu1_analytic", "mean_snr_mc", "se_mc"),
        rows=tuple(rows), provenance=_provenance(cfg))


def _run_fig3(cfg: ExperimentConfig) -> ResultTable:
    kappas = _require(cfg.sweep.kappas, "kappas", "fig3")
    areas = _require(cfg.sweep.areas_m2, "areas_m2", "fig3")
    rows = []
    index = 0
    for kappa in kappas:
        for area in areas:
            system = _with_kappa(dataclasses.replace(
                cfg.system, geometry=_square_geometry(area)), kappa)
            mu1, mu2 = _snr_moments(system)
            batch = _mc_batch(cfg, system, _point_seed(cfg.seed, 3, index))
            index += 1
            rows.append((kappa, area, se_bound(mu1),
                         batch.summaries().mean_se_bits,
                         dominant_error_term(mu1, mu2)))
    return ResultTable(
        columns=("kappa", "area", "se_bound", "mean_se_mc", "det"),
        rows=tuple(rows), provenance=_provenance(cfg))


def _run_fig4(cfg: ExperimentConfig) -> ResultTable:
    areas = _require(cfg.sweep.areas_m2, "areas_m2", "fig4")
    aspects = _require(cfg.sweep.aspects, "aspects", "fig4")
    thresholds_db = _require(cfg.sweep.thresholds_db, "thresholds_db", "fig4")
    rows = []
    index = 0
    for area in areas:
        for aspect in aspects:
            for kind in (CorrelationKind.SINC, CorrelationKind.JAKES):
                system = _with_model(dataclasses.replace(
                    cfg.system, geometry=_square_geometry(area, aspect)), kind)
                mu1, mu2 = _snr_moments(system)
                fit = gamma_fit(mu1, mu2)
                batch = _mc_batch(cfg, system, _point_seed(cfg.seed, 4, index))
                index += 1
                ecdf = empirical_cdf(batch)
                for t_db in thresholds_db:
                    x = _db_to_linear(t_db)
                    rows.append((area, aspect, kind.value, t_db,
                                 outage_probability(fit, x), ecdf(x)))
    return ResultTable(
        columns=("area", "aspect", "model", "snr_threshold_db",
                 "outage_gamma", "outage_empirical"),
        rows=tuple(rows), provenance=_provenance(cfg))


def _run_fig5(cfg: ExperimentConfig) -> ResultTable:
    setups = _require(cfg.sweep.setups, "setups", "fig5")
    areas = _require(cfg.sweep.areas_m2, "areas_m2", "fig5")
    kappas = _require(cfg.sweep.kappas, "kappas", "fig5")
    rows = []
    index = 0
    for setup in setups:
        for area in areas:
            for kappa in kappas:
                system = _with_kappa(_with_setup(dataclasses.replace(
                    _with_model(cfg.system, CorrelationKind.SINC),
                    geometry=_square_geometry(area)), setup), kappa)
                mu1, mu2 = _snr_moments(system)
                batch = _mc_batch(cfg, system, _point_seed(cfg.seed, 5, index))
                index += 1
                summary = batch.summaries()
                rows.append((area, kappa, setup, cv_squared(mu1, mu2),
                             summary.var_snr / summary.mean_snr ** 2))
    return ResultTable(
        columns=("area", "kappa", "setup", "cv2_analytic", "cv2_mc"),
        rows=tuple(rows), provenance=_provenance(cfg))


def _run_table1(cfg: ExperimentConfig) -> ResultTable:
    kappas = _require(cfg.sweep.kappas, "kappas", "table1")
    rows = []
    for kappa in kappas:
        system = _with_kappa(cfg.system, kappa)
        mu1, mu2 = _snr_moments(system)
        seb = se_bound(mu1)
        det = dominant_error_term(mu1, mu2)
        rows.append((kappa, seb, det, 100.0 * det / seb))
    return ResultTable(
        columns=("kappa", "seb", "det", "det_over_seb_pct"),
        rows=tuple(rows), provenance=_provenance(cfg))


_SCENARIO_RUNNERS = {
    "fig2": _run_fig2,
    "fig3": _run_fig3,
    "fig4": _run_fig4,
    "fig5": _run_fig5,
    "table1": _run_table1,
}


def run_scenario(name: str, cfg: ExperimentConfig) -> ResultTable:
    """Produce the data table for one named scenario."""
    if name not in _SCENARIO_RUNNERS:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")
    return _SCENARIO_RUNNERS[name](cfg)


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

def validate(cfg: ExperimentConfig,
             quad: QuadratureSpec = QuadratureSpec()) -> ValidationReport:
    """Run the cross-oracle consistency checks on the configured system."""
    checks = []
    system = cfg.system
    geom = system.geometry

    def record(name, fn, threshold, note=""):
        try:
            measured = fn()
            passed = measured <= threshold
        except ContrisError as exc:
            measured = float("nan")
            passed = False
            note = f"{type(exc).__name__}: {exc}"
        checks.append(CheckResult(name=name, measured=measured,
                                  threshold=threshold, passed=passed, note=note))

    gains = derive_gains(system)
    m1 = moment_m1(geom, gains.beta_ur)

    def m2_cross():
        iso = moment_m2_iso(geom, system.correlation, gains.beta_ur, quad)
        brute = moment_m2_quad4(geom, system.correlation, gains.beta_ur, quad)
        return abs(iso - brute) / brute

    record("m2_iso_vs_quad4_rel", m2_cross, 1e-4)

    def fs_norm():
        total = integrate_piecewise(
            lambda r: rect_distance_pdf(geom, r),
            [0.0, *geom.canonical()[::-1], geom.diagonal_m],
            QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14))
        return abs(total - 1.0)

    record("distance_pdf_normalization", fs_norm, 1e-10)

    n_small = min(cfg.replicates, 20000)
    grid = make_grid(geom, cfg.grid[0], cfg.grid[1])
    batch = run_replicates(system, grid, n_small, _point_seed(cfg.seed, 0, 0))
    summary = batch.summaries()

    record("mean_y_exactness_z",
           lambda: abs(summary.mean_y - m1) / summary.se_mean_y, 3.0,
           note=f"n={n_small}")

    mu_cache = {}

    def mu_pair():
        if "mu" not in mu_cache:
            mu_cache["mu"] = _snr_moments(system, quad)
        return mu_cache["mu"]

    def jensen_slack():
        # bound minus empirical mean rate, in 3-standard-error units below 0
        mu1, _ = mu_pair()
        return (summary.mean_se_bits - 3.0 * summary.se_mean_se_bits
                - se_bound(mu1))

    record("jensen_dominance_slack", jensen_slack, 0.0)

    def gamma_round_trip():
        mu1, mu2 = mu_pair()
        fit = gamma_fit(mu1, mu2)
        return max(abs(fit.mean - mu1) / mu1,
                   abs(fit.variance - (mu2 - mu1 ** 2)) / (mu2 - mu1 ** 2))

    record("gamma_fit_round_trip_rel", gamma_round_trip, 1e-12)

    def snr_identity():
        sampler = build_surface_covariance(geom, grid, system.correlation,
                                           gains.beta_ur)
        r_d = bs_correlation_matrix(system.array, system.bs_correlation)
        a_b = steering_vector(system.array)
        worst = 0.0
        for i in range(200):
            rng = _replicate_rng(_point_seed(cfg.seed, 0, 1), i)
            field = sample_field(sampler, rng)
            h_d = sample_direct_channel(r_d, gains.beta_d, rng)
            y = compute_Y(field, grid)
            expanded = optimal_snr_sample(h_d, y, a_b, system)
            norm = snr_norm_form(h_d, y, a_b, system)
            worst = max(worst, abs(expanded - norm) / norm)
        return worst

    record("snr_expansion_identity_rel", snr_identity, 1e-10)

    return ValidationReport(checks=tuple(checks))


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(table: ResultTable, path: str) -> None:
    """Write the table as CSV with '#'-prefixed provenance comments."""
    lines = [f"# {key}={value}" for key, value in table.provenance.items()]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _parse_grid(text: str) -> tuple:
    try:
        nx, ny = text.lower().split("x")
        return int(nx), int(ny)
    except ValueError:
        raise ConfigError(f"grid must look like 32x32, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contris",
        description="Continuous-surface link statistics: analytic engine, "
                    "Monte Carlo validation and scenario tables.")
    parser.add_argument("--config", help="path to a JSON config document")
    parser.add_argument("--scenario", choices=SCENARIOS,
                        help="named result table to produce")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--replicates", type=int, help="override replicate count")
    parser.add_argument("--grid", help="override grid, e.g. 64x64")
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument("--validate", action="store_true",
                        help="run the cross-oracle validation checks and exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        document = None
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    document = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}")
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}")
        cfg = load_config(document)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.replicates is not None:
            overrides["replicates"] = args.replicates
        if args.grid is not None:
            overrides["grid"] = _parse_grid(args.grid)
        if args.out is not None:
            overrides["output_path"] = args.out
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)

        if args.validate:
            report = validate(cfg)
            for check in report.checks:
                status = "PASS" if check.passed else "FAIL"
                note = f"  ({check.note})" if check.note else ""
                print(f"[{status}] {check.name}: measured {check.measured:.3e}"
                      f" vs threshold {check.threshold:.3e}{note}")
            return 0 if report.all_passed else 1

        if not args.scenario:
            raise ConfigError("--scenario is required unless --validate is given")
        if not cfg.output_path:
            raise ConfigError("an output path is required (--out or output_path)")
        table = run_scenario(args.scenario, cfg)
        emit(table, cfg.output_path)
        print(f"wrote {len(table.rows)} rows to {cfg.output_path}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
