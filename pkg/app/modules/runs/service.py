"""Run orchestration: config parsing, experiment runs and their CSV / gate-IR output."""

import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from app.core.csv_table import CsvTable, format_number
from app.core.exceptions import ConfigError
from app.core.operators import HermitianOperator, spectral_norm
from app.modules.drive.schemas import GateSequence, GateStep, GeneratorTag, Ordering
from app.modules.drive.service import (
    adiabatic_unitary,
    drive_infidelity,
    gate_sequence,
    generator_gap,
    ground_spectrum,
    quench_infidelity,
    scaling_exponent,
    sequence_complexity,
    sweep_K,
    transfer_infidelity,
)
from app.modules.hamiltonians.schemas import AffineSchedule, LMGModel, Model, TwoLevelModel
from app.modules.hamiltonians.service import two_level_gap
from app.modules.runs.schemas import CONFIG_KEYS, KernelGrid, RunConfig
from app.modules.schedule.schemas import AngleSchedule
from app.modules.schedule.service import (
    complexity_estimate,
    regularized_angles,
    standard_angles,
    two_level_angles,
)
from app.modules.spectral.schemas import SpectralFunction
from app.modules.spectral.service import effective_generator, exact_agp, kernel_curve, relative_error

logger = logging.getLogger("udcd.runs")

TWO_LEVEL_STEPS = (4e-2, 2e-2, 1e-2, 5e-3)
DELTA_MIN_SUFFIX = "*delta_min"
ORDERING_NOTE = {
    Ordering.ASCENDING: "ascending (k = -K applied first, k = +K last)",
    Ordering.DESCENDING: "descending (k = +K applied first, k = -K last)",
}


# ── Config document ──

def parse_config(text: str) -> RunConfig:
    """Parse a flat `key = value` document with `#` comments."""
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in CONFIG_KEYS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=lineno)
        if not value:
            raise ConfigError("missing value", key=key, line=lineno)
        lines[key] = lineno

        if key == "omega" and value.lower() == "auto":
            continue
        if key == "eta" and value.replace(" ", "").lower().endswith(DELTA_MIN_SUFFIX):
            fraction = value.replace(" ", "")[: -len(DELTA_MIN_SUFFIX)]
            values["eta_fraction"] = fraction
            lines["eta_fraction"] = lineno
            continue
        values[key] = value

    if values.get("model") == "lmg" and "n_spins" not in values:
        raise ConfigError("required for model = lmg", key="n_spins")

    try:
        return RunConfig.model_validate(values)
    except ValidationError as exc:
        err = exc.errors()[0]
        key = str(err["loc"][0]) if err["loc"] else None
        if key == "lambda_":
            key = "lambda"
        shown = "eta" if key == "eta_fraction" else key
        raise ConfigError(err["msg"], key=shown, line=lines.get(key) if key else None) from exc


def serialize_config(config: RunConfig) -> str:
    """Inverse of parse_config; None fields are left out."""
    dumped = config.model_dump(by_alias=True)
    out = []
    for key in CONFIG_KEYS:
        if key == "omega":
            out.append(f"omega = {'auto' if config.omega is None else format_number(config.omega)}")
            continue
        if key == "eta":
            if config.eta_fraction is not None:
                out.append(f"eta = {format_number(config.eta_fraction)}{DELTA_MIN_SUFFIX}")
            elif config.eta is not None:
                out.append(f"eta = {format_number(config.eta)}")
            continue
        value = dumped[key]
        if value is None:
            continue
        if isinstance(value, Ordering):
            value = value.value
        out.append(f"{key} = {format_number(value)}")
    return "\n".join(out) + "\n"


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    return parse_config(text)


def build_model(config: RunConfig) -> Model:
    if config.model == "lmg":
        return LMGModel(n_spins=config.n_spins, j0=config.j0, hx0=config.hx0)
    return TwoLevelModel(
        hx=AffineSchedule(offset=config.hx_offset, slope=config.hx_slope),
        hz=AffineSchedule(offset=config.hz_offset, slope=config.hz_slope),
    )


# ── Working point ──

@dataclass(frozen=True)
class WorkingPoint:
    """A config resolved against its model: operators, spectrum, cutoff and eta."""

    config: RunConfig
    model: Model
    h: HermitianOperator
    dh: HermitianOperator
    spectrum: SpectralFunction
    omega: float
    eta: float | None

    def schedule(self, K: int, regularized: bool | None = None) -> AngleSchedule:
        use_eta = self.eta is not None if regularized is None else regularized
        if K == 0:
            return AngleSchedule.build(self.omega, self.config.delta_lambda, [], eta=self.eta if use_eta else None)
        if use_eta:
            if self.eta is None:
                raise ConfigError("a regularized schedule needs eta", key="eta")
            return regularized_angles(K, self.omega, self.config.delta_lambda, self.eta)
        return standard_angles(K, self.omega, self.config.delta_lambda)


def resolve(config: RunConfig) -> WorkingPoint:
    model = build_model(config)
    lam = config.lambda_
    spectrum = ground_spectrum(model, lam)
    omega = spectrum.delta_max if config.omega is None else config.omega
    eta = config.resolve_eta(spectrum.delta_min)
    logger.info(
        "Resolved cutoff %s (delta_min=%.6g, delta_max=%.6g)",
        "auto" if config.omega is None else "explicit",
        spectrum.delta_min,
        spectrum.delta_max,
        extra={"model": config.model, "omega": omega, "eta": eta, "delta_lambda": config.delta_lambda},
    )
    return WorkingPoint(
        config=config,
        model=model,
        h=model.hamiltonian(lam),
        dh=model.derivative(lam),
        spectrum=spectrum,
        omega=omega,
        eta=eta,
    )


def _require(config: RunConfig, key: str, command: str) -> int:
    value = getattr(config, key)
    if value is None:
        raise ConfigError(f"required by '{command}'", key=key)
    return value


def _spectrum_comments(point: WorkingPoint) -> list[str]:
    return [
        f"model = {point.config.model}",
        f"omega = {format_number(point.omega)}",
        f"delta_min = {format_number(point.spectrum.delta_min)}",
        f"delta_max = {format_number(point.spectrum.delta_max)}",
        f"delta_lambda = {format_number(point.config.delta_lambda)}",
        f"eta = {'none' if point.eta is None else format_number(point.eta)}",
    ]


# ── Runs ──

def run_sweep(config: RunConfig) -> CsvTable:
    """Infidelity against K for K = 1..k_max, with the regularized column when eta is set."""
    k_max = _require(config, "k_max", "sweep")
    started = time.perf_counter()
    point = resolve(config)
    lam, step = config.lambda_, config.delta_lambda

    base = sweep_K(point.model, lam, step, point.omega, k_max, None, config.ordering)
    regularized = None
    if point.eta is not None:
        regularized = sweep_K(point.model, lam, step, point.omega, k_max, point.eta, config.ordering)

    header = ["K", "infidelity"]
    if regularized is not None:
        header.append("infidelity_regularized")
    header += ["quench_infidelity", "predicted_half_period_multiples", "complexity_total"]

    rows = []
    for i, row in enumerate(base.rows):
        cells: list = [row.K, row.infidelity]
        if regularized is not None:
            cells.append(regularized.rows[i].infidelity)
        cells += [row.quench_infidelity, 2.0 * row.K / base.predicted_period, row.complexity.total]
        rows.append(tuple(cells))

    comments = _spectrum_comments(point) + [
        f"K_p = {format_number(base.predicted_period)}",
        f"ordering = {ORDERING_NOTE[config.ordering]}",
    ]
    logger.info(
        "Sweep table ready",
        extra={"command": "sweep", "K": k_max, "duration_ms": round((time.perf_counter() - started) * 1000, 1)},
    )
    return CsvTable(header=tuple(header), rows=tuple(rows), comments=tuple(comments))


def run_kernel(config: RunConfig, grid: KernelGrid) -> CsvTable:
    """Kernel curves over an omega grid, one column per K."""
    point = resolve(config)
    if grid.regularized and point.eta is None:
        raise ConfigError("the regularized kernel needs eta", key="eta")
    upper = grid.omega_max if grid.omega_max is not None else point.omega
    lower = grid.omega_min if grid.omega_min is not None else upper / grid.points
    if lower >= upper:
        raise ConfigError(f"omega_min={lower} must be below omega_max={upper}")
    omegas = np.linspace(lower, upper, grid.points)

    ks = grid.k_list or (0,)
    columns = []
    for K in ks:
        sched = point.schedule(K, regularized=grid.regularized)
        columns.append(kernel_curve(sched, omegas, regularized=grid.regularized, eta=point.eta))

    header = ("omega",) + tuple(f"kernel_K{K}" for K in ks)
    rows = tuple((float(w),) + tuple(col[i] for col in columns) for i, w in enumerate(omegas))
    comments = _spectrum_comments(point) + [f"regularized = {'true' if grid.regularized else 'false'}"]
    return CsvTable(header=header, rows=rows, comments=tuple(comments))


def run_angles(config: RunConfig) -> CsvTable:
    """The (k, theta_k, phi_k) table of the configured schedule."""
    K = config.k if config.k is not None else _require(config, "k_max", "angles")
    point = resolve(config)
    sched = point.schedule(K)
    rows = tuple((k, theta, phi) for k, (theta, phi) in enumerate(sched.pairs, start=1))
    comments = _spectrum_comments(point) + [f"kind = {sched.kind}"]
    return CsvTable(header=("k", "theta", "phi"), rows=rows, comments=tuple(comments))


def run_complexity(config: RunConfig) -> CsvTable:
    """Closed-form complexity next to the gate-by-gate count of the merged sequence."""
    k_values = [config.k] if config.k is not None else list(range(1, _require(config, "k_max", "complexity") + 1))
    point = resolve(config)
    h_norm, dh_norm = spectral_norm(point.h), spectral_norm(point.dh)
    rows = []
    for K in k_values:
        sched = point.schedule(K)
        report = complexity_estimate(sched, h_norm, dh_norm)
        merged = gate_sequence(sched, merge=True, ordering=config.ordering)
        counted = sequence_complexity(merged, h_norm, dh_norm)
        rows.append((K, report.h_term, report.dh_term, report.total, len(merged), counted.total))
    comments = _spectrum_comments(point) + [
        f"h_norm = {format_number(h_norm)}",
        f"dh_norm = {format_number(dh_norm)}",
    ]
    return CsvTable(
        header=("K", "h_term", "dh_term", "total", "merged_steps", "sequence_total"),
        rows=tuple(rows),
        comments=tuple(comments),
    )


def run_twolevel_check(config: RunConfig) -> CsvTable:
    """Exact-angle two-level drive over a ladder of steps, with fitted log-log slopes."""
    if config.model != "two_level":
        raise ConfigError("twolevel-check needs model = two_level", key="model")
    point = resolve(config)
    model, lam = point.model, config.lambda_
    gap = two_level_gap(model, lam)
    agp = exact_agp(point.h, point.dh)

    rows = []
    for step in TWO_LEVEL_STEPS:
        sched = two_level_angles(gap, step)
        rows.append(
            (
                step,
                drive_infidelity(model, lam, sched, 0, config.ordering),
                transfer_infidelity(model, lam, step, adiabatic_unitary(agp, step)),
                quench_infidelity(model, lam, step),
                generator_gap(point.h, point.dh, sched, config.ordering),
                relative_error(effective_generator(point.h, point.dh, sched), agp),
            )
        )
    steps = [r[0] for r in rows]
    comments = [
        f"gap = {format_number(gap)}",
        f"slope_infidelity = {format_number(_slope(steps, [r[1] for r in rows]))}",
        f"slope_adiabatic_infidelity = {format_number(_slope(steps, [r[2] for r in rows]))}",
        f"slope_generator_gap = {format_number(_slope(steps, [r[4] for r in rows]))}",
        f"ordering = {ORDERING_NOTE[config.ordering]}",
    ]
    return CsvTable(
        header=(
            "delta_lambda",
            "infidelity",
            "adiabatic_infidelity",
            "quench_infidelity",
            "generator_gap",
            "generator_relative_error",
        ),
        rows=tuple(rows),
        comments=tuple(comments),
    )


def _slope(xs, ys) -> float:
    if min(ys) <= 0.0:
        return math.nan
    return scaling_exponent(xs, ys)


# ── Gate IR ──

def export_gates(config: RunConfig) -> str:
    """Gate list for the configured K, one `EXPH <angle>` / `EXPDH <angle>` per line.

    `EXPH a` is exp(-i a H(lambda)); lines are listed in application order.
    """
    K = _require(config, "k", "gates")
    point = resolve(config)
    sched = point.schedule(K)
    sequence = gate_sequence(sched, merge=config.merge, ordering=config.ordering)
    report = sequence_complexity(sequence, spectral_norm(point.h), spectral_norm(point.dh))

    lines = [
        "# udcd gate sequence",
        "# EXPH a = exp(-i a H(lambda)), EXPDH a = exp(-i a dH(lambda)); first line is applied first",
        f"# K = {K}",
        f"# omega = {format_number(sched.omega)}",
        f"# delta_lambda = {format_number(sched.delta_lambda)}",
        f"# eta = {'none' if sched.eta is None else format_number(sched.eta)}",
        f"# ordering = {config.ordering.value}",
        f"# merged = {'true' if sequence.merged else 'false'}",
        f"# complexity h_term = {format_number(report.h_term)}",
        f"# complexity dh_term = {format_number(report.dh_term)}",
        f"# complexity total = {format_number(report.total)}",
    ]
    for step in sequence.steps:
        mnemonic = "EXPH" if step.tag == GeneratorTag.H else "EXPDH"
        lines.append(f"{mnemonic} {format_number(step.angle)}")
    return "\n".join(lines) + "\n"


_MNEMONICS = {"EXPH": GeneratorTag.H, "EXPDH": GeneratorTag.DH}


def parse_gates(text: str) -> GateSequence:
    """Read gate IR back; `merged` and `ordering` come from the header comments."""
    steps: list[GateStep] = []
    header: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                header[key.strip()] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in _MNEMONICS:
            raise ConfigError(f"expected 'EXPH <angle>' or 'EXPDH <angle>', got {line!r}", line=lineno)
        try:
            angle = float(parts[1])
        except ValueError as exc:
            raise ConfigError(f"angle {parts[1]!r} is not a number", line=lineno) from exc
        steps.append(GateStep(tag=_MNEMONICS[parts[0]], angle=angle))

    try:
        ordering = Ordering(header.get("ordering", Ordering.ASCENDING.value))
    except ValueError as exc:
        raise ConfigError(f"unknown ordering {header['ordering']!r}", key="ordering") from exc
    return GateSequence(steps=tuple(steps), merged=header.get("merged") == "true", ordering=ordering)
