"""Sweep engine: config ingestion, parallel grid evaluation, CSV emission.

A sweep is a JSON file with one top-level object selecting a solver, a
parameter block (either dimensionless ``model_params`` or a SI
``microscopic_params`` block that gets reduced first), and rectangular
omega/power grids. Evaluation order is deterministic: tasks are indexed,
workers only map over immutable inputs, and rows are gathered and sorted
before anything is written, so output bytes are independent of the worker
count.

Power-grid semantics depend on the solver: for ``array-nonlinear`` the grid
is the swept *output amplitude* (the natural single-valued sweep variable)
and the power column reports the computed incident power; everywhere else
the grid is the incident power itself. Nonlinear solvers emit one row per
(omega, power, branch).
"""

from __future__ import annotations

import dataclasses
import json
import math
import multiprocessing
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bistability, continuum, lattice, linear
from .errors import ConfigError, QlsError
from .model import ModelParams, MicroscopicParams, derive_dimensionless, linear_beta

SOLVERS = (
    "single-linear",
    "single-nonlinear",
    "array-linear",
    "array-lattice",
    "array-nonlinear",
    "array-closed-form",
)

CSV_COLUMNS = (
    "omega",
    "power",
    "D",
    "R",
    "absorption",
    "branch",
    "residual",
    "converged",
    "solver",
    "flags",
)


@dataclass(frozen=True)
class GridSpec:
    """One sweep axis: [min, max] with count points, linear or log spaced."""

    min: float
    max: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError(f"grid count must be >= 1, got {self.count!r}")
        if self.count > 1 and not self.min < self.max:
            raise ConfigError(
                f"grid needs min < max for count > 1, got [{self.min!r}, {self.max!r}]"
            )
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"grid scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and not self.min > 0.0:
            raise ConfigError("log-scaled grid requires min > 0")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        if self.scale == "log":
            return np.logspace(math.log10(self.min), math.log10(self.max), self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class SweepConfig:
    solver: str
    params: ModelParams
    omega_grid: GridSpec
    power_grid: GridSpec
    output: str | None = None
    workers: int = 0
    deterministic: bool = True
    tag: str = ""

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        if self.workers < 0:
            raise ConfigError(f"workers must be >= 0, got {self.workers!r}")
        if self.deterministic is not True:
            # No solver has a stochastic component; the flag exists so configs
            # state the guarantee explicitly and cannot silently weaken it.
            raise ConfigError("deterministic must be true: all solvers are seed-free")


@dataclass(frozen=True)
class ResultRow:
    omega: float
    power: float
    d: float
    r: float
    absorption: float
    branch: str
    residual: float
    converged: bool
    solver: str
    flags: str

    def sort_key(self):
        return (self.omega, self.power, self.branch)


def _field_context(block: dict, cls, name: str):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"{name}: unknown field(s) {sorted(unknown)}")
    try:
        return cls(**block)
    except TypeError as exc:
        raise ConfigError(f"{name}: {exc}") from exc
    except (ValueError, QlsError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def config_from_dict(data: dict, tag: str = "") -> SweepConfig:
    """Build a validated SweepConfig, naming the offending field on error."""
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a JSON object")
    known = {
        "solver",
        "model_params",
        "microscopic_params",
        "omega_grid",
        "power_grid",
        "output",
        "workers",
        "deterministic",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}")
    if "solver" not in data:
        raise ConfigError("missing required key 'solver'")
    if ("model_params" in data) == ("microscopic_params" in data):
        raise ConfigError("provide exactly one of 'model_params' or 'microscopic_params'")
    if "model_params" in data:
        params = _field_context(data["model_params"], ModelParams, "model_params")
    else:
        micro = _field_context(
            data["microscopic_params"], MicroscopicParams, "microscopic_params"
        )
        params = derive_dimensionless(micro)
    for grid_key in ("omega_grid", "power_grid"):
        if grid_key not in data:
            raise ConfigError(f"missing required key '{grid_key}'")
    omega_grid = _field_context(data["omega_grid"], GridSpec, "omega_grid")
    power_grid = _field_context(data["power_grid"], GridSpec, "power_grid")
    if not omega_grid.min > 0.0:
        raise ConfigError("omega_grid: omega must be > 0")
    if power_grid.min < 0.0:
        raise ConfigError("power_grid: power must be >= 0")
    return SweepConfig(
        solver=data["solver"],
        params=params,
        omega_grid=omega_grid,
        power_grid=power_grid,
        output=data.get("output"),
        workers=int(data.get("workers", 0)),
        deterministic=data.get("deterministic", True),
        tag=tag,
    )


def load_config(path) -> SweepConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(data)


def _rows_for_point(solver, params, omega, power, tag):
    """Evaluate one grid point; returns a list of ResultRow."""
    flags_tag = [tag] if tag else []

    def mk(res, power_value, extra_flags=()):
        flags = ";".join(flags_tag + list(res.flags) + list(extra_flags))
        return ResultRow(
            omega=float(omega),
            power=float(power_value),
            d=res.d,
            r=res.r,
            absorption=res.absorption,
            branch=res.branch,
            residual=res.residual,
            converged=res.converged,
            solver=solver,
            flags=flags,
        )

    if solver == "single-linear":
        return [mk(linear.single_qubit_linear_d(omega, params), power)]
    if solver == "array-linear":
        return [mk(linear.array_linear_d(omega, params), power)]
    if solver == "array-lattice":
        res = lattice.linear_transfer_matrix_d(omega, params, linear_beta(omega, params))
        return [mk(res, power)]
    if solver == "single-nonlinear":
        roots = bistability.single_qubit_nonlinear_roots(omega, params, power)
        labels = ("lower", "middle", "upper") if len(roots) >= 3 else ("unique",)
        rows = []
        for root, label in zip(roots, labels):
            resv = abs(bistability.transcendental_residual(root, omega, params, power))
            rows.append(
                ResultRow(
                    omega=float(omega),
                    power=float(power),
                    d=root,
                    r=float("nan"),
                    absorption=float("nan"),
                    branch=label,
                    residual=resv,
                    converged=True,
                    solver=solver,
                    flags=";".join(flags_tag),
                )
            )
        return rows
    if solver == "array-nonlinear":
        # grid value is the swept output amplitude; report the incident power
        res, incident = continuum.shoot_nonlinear_bvp(omega, params, power)
        return [mk(res, incident, ("amp=%.17g" % power,))]
    if solver == "array-closed-form":
        roots = continuum.closed_form_nonlinear_d(omega, params, power)
        coeff = continuum.closed_form_coefficient(omega, params)
        labels = ("lower", "middle", "upper") if len(roots) >= 3 else ("unique",)
        rows = []
        for root, label in zip(roots, labels):
            resv = abs(root - 1.0 / (1.0 + (coeff / (power * root + 1.0)) ** 2))
            rows.append(
                ResultRow(
                    omega=float(omega),
                    power=float(power),
                    d=root,
                    r=float("nan"),
                    absorption=float("nan"),
                    branch=label,
                    residual=resv,
                    converged=True,
                    solver=solver,
                    flags=";".join(flags_tag),
                )
            )
        return rows
    raise ConfigError(f"unknown solver {solver!r}")


def _eval_task(task):
    solver, params, omega, power, tag = task
    try:
        return _rows_for_point(solver, params, omega, power, tag)
    except QlsError as exc:
        flags = ";".join(filter(None, [tag, type(exc).__name__]))
        return [
            ResultRow(
                omega=float(omega),
                power=float(power),
                d=float("nan"),
                r=float("nan"),
                absorption=float("nan"),
                branch="unique",
                residual=float("nan"),
                converged=False,
                solver=solver,
                flags=flags,
            )
        ]


def resolve_workers(requested: int) -> int:
    env = os.environ.get("QLS_WORKERS")
    if env is not None:
        requested = int(env)
    if requested <= 0:
        requested = os.cpu_count() or 1
    return requested


def run_sweep(config: SweepConfig, workers: int | None = None):
    """Evaluate the grid; returns (rows, n_failed_points).

    Rows are sorted by (omega, power, branch) and are byte-for-byte
    reproducible for any worker count.
    """
    n_workers = resolve_workers(config.workers if workers is None else workers)
    tasks = [
        (config.solver, config.params, float(w), float(p), config.tag)
        for w in config.omega_grid.values()
        for p in config.power_grid.values()
    ]
    if n_workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(processes=n_workers) as pool:
            chunks = pool.map(_eval_task, tasks, chunksize=max(1, len(tasks) // (4 * n_workers)))
    else:
        chunks = [_eval_task(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    n_failed = sum(1 for chunk in chunks if not chunk[0].converged)
    rows.sort(key=ResultRow.sort_key)
    return rows, n_failed


def format_float(x: float) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def write_csv(rows, path, header_comments=()):
    """Write rows with full round-trip precision and '#' provenance lines."""
    lines = [f"# {c}" for c in header_comments]
    lines.append(",".join(CSV_COLUMNS))
    for row in rows:
        lines.append(
            ",".join(
                (
                    format_float(row.omega),
                    format_float(row.power),
                    format_float(row.d),
                    format_float(row.r),
                    format_float(row.absorption),
                    row.branch,
                    format_float(row.residual),
                    "true" if row.converged else "false",
                    row.solver,
                    row.flags,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def validate_config(path):
    """Parse and validate; returns (ok, diagnostics) without running anything."""
    diagnostics = []
    try:
        config = load_config(path)
    except ConfigError as exc:
        return False, [f"error: {exc}"]
    diagnostics.append(f"solver: {config.solver}")
    p = config.params
    diagnostics.append(
        "params: gamma_q=%g coupling_g=%g interaction_eta=%g line_damping=%g "
        "length_kl=%g spacing_ka=%g qubit_count=%d"
        % (
            p.gamma_q,
            p.coupling_g,
            p.interaction_eta,
            p.line_damping,
            p.length_kl,
            p.spacing_ka,
            p.qubit_count,
        )
    )
    raw = json.loads(Path(path).read_text())
    if "microscopic_params" in raw:
        diagnostics.append(
            "derived from microscopic block: eta=%.6g g=%.6g Gamma=%.6g"
            % (p.interaction_eta, p.coupling_g, p.gamma_q)
        )
    for name, grid in (("omega_grid", config.omega_grid), ("power_grid", config.power_grid)):
        diagnostics.append(
            f"{name}: ok ({grid.count} points, {grid.scale}, [{grid.min:g}, {grid.max:g}])"
        )
    return True, diagnostics


# ---------------------------------------------------------------------------
# Reproduction presets
# ---------------------------------------------------------------------------

def _fig2_configs():
    cases = [
        ("gamma=1e-2,g=0.06", 1e-2, 0.06),
        ("gamma=1e-2,g=0.008", 1e-2, 0.008),
        ("gamma=1e-1,g=0.06", 1e-1, 0.06),
    ]
    configs = []
    for tag, gamma, g in cases:
        params = ModelParams(gamma_q=gamma, coupling_g=g, spacing_ka=1.0, qubit_count=1)
        configs.append(
            SweepConfig(
                solver="single-linear",
                params=params,
                omega_grid=GridSpec(0.9, 1.1, 401),
                power_grid=GridSpec(0.0, 0.0, 1),
                tag=tag,
            )
        )
    header = [
        "preset: fig2: linear single-qubit dip D(omega)",
        "curves: " + "; ".join(tag for tag, _, _ in cases),
    ]
    return configs, header, "omega"


def _fig3_configs():
    gamma = 1e-2
    configs = []
    cases = [("g/gamma=9", 9.0), ("g/gamma=16", 16.0), ("g/gamma=34.6", 34.6)]
    for tag, ratio in cases:
        params = ModelParams(
            gamma_q=gamma, coupling_g=ratio * gamma, interaction_eta=1.0,
            spacing_ka=1.0, qubit_count=1,
        )
        configs.append(
            SweepConfig(
                solver="single-nonlinear",
                params=params,
                omega_grid=GridSpec(1.0, 1.0, 1),
                power_grid=GridSpec(1e-6, 1.0, 241, "log"),
                tag=tag,
            )
        )
    header = [
        "preset: fig3: single-qubit D(P0) at resonance, gamma_q=1e-2, eta=1",
        "power in natural units (incident |amplitude|^2, charge in units of e)",
        "curves: " + "; ".join(tag for tag, _ in cases),
    ]
    return configs, header, "power"


def _array_params(g_over_a: float, kl: float, gamma: float, n: int = 100) -> ModelParams:
    spacing = kl / n
    return ModelParams(
        gamma_q=gamma,
        coupling_g=g_over_a * spacing,
        interaction_eta=1.0,
        length_kl=kl,
        spacing_ka=spacing,
        qubit_count=n,
    )


def _fig4_configs():
    gamma = 3e-3
    configs = []
    cases = [("g*c0/(wq*a)=9", 9.0), ("g*c0/(wq*a)=900", 900.0)]
    for tag, g_over_a in cases:
        configs.append(
            SweepConfig(
                solver="array-linear",
                params=_array_params(g_over_a, 0.01, gamma),
                omega_grid=GridSpec(0.9, 1.1, 2001),
                power_grid=GridSpec(0.0, 0.0, 1),
                tag=tag,
            )
        )
    header = [
        "preset: fig4: dense-array D(omega), gamma_q=3e-3, k*l=0.01",
        "curves: " + "; ".join(tag for tag, _ in cases),
    ]
    return configs, header, "omega"


def _fig5_configs():
    gamma = 3e-3
    configs = []
    cases = [("k*l=0.08", 0.08), ("k*l=0.32", 0.32)]
    for tag, kl in cases:
        configs.append(
            SweepConfig(
                solver="array-linear",
                params=_array_params(9.0, kl, gamma),
                omega_grid=GridSpec(0.9, 1.1, 4001),
                power_grid=GridSpec(0.0, 0.0, 1),
                tag=tag,
            )
        )
    header = [
        "preset: fig5: dense-array D(omega), gamma_q=3e-3, g*c0/(wq*a)=9",
        "curves: " + "; ".join(tag for tag, _ in cases),
    ]
    return configs, header, "omega"


def _fig6_configs():
    configs = []
    cases = [("chi*l/(4k*xi^2)=4", 4.0), ("chi*l/(4k*xi^2)=17", 17.0)]
    for tag, caption_value in cases:
        params = continuum.params_for_continuum(
            kl=12.0, coefficient=2.0 * caption_value, omega=0.98, gamma=1e-3
        )
        configs.append(
            SweepConfig(
                solver="array-closed-form",
                params=params,
                omega_grid=GridSpec(0.98, 0.98, 1),
                power_grid=GridSpec(1e-2, 1e4, 241, "log"),
                tag=tag,
            )
        )
    header = [
        "preset: fig6: strongly nonlinear array recovery D(P)",
        "caption values are chi*l/(4k*xi^2); the implicit relation uses",
        "chi*l/(2k*xi^2) = 2x the caption value (factor-2 bookkeeping is",
        "ambiguous in the source; the caption value is taken literally)",
        "power in natural units (incident |amplitude|^2)",
        "curves: " + "; ".join(tag for tag, _ in cases),
    ]
    return configs, header, "power"


PRESETS = {
    "fig2": _fig2_configs,
    "fig3": _fig3_configs,
    "fig4": _fig4_configs,
    "fig5": _fig5_configs,
    "fig6": _fig6_configs,
}


def repro(figure_id: str, out_dir=".", *, plot: bool = False, workers: int = 0):
    """Run a pre-baked preset; emits <figure_id>.csv (and .png with plot=True).

    Returns (written paths, total failed points).
    """
    if figure_id not in PRESETS:
        raise ConfigError(f"unknown figure id {figure_id!r}; expected one of {sorted(PRESETS)}")
    configs, header, axis = PRESETS[figure_id]()
    all_rows = []
    n_failed = 0
    for config in configs:
        rows, failed = run_sweep(config, workers=workers)
        all_rows.extend(rows)
        n_failed += failed
    all_rows.sort(key=lambda row: (row.flags.split(";", 1)[0], *row.sort_key()))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{figure_id}.csv"
    write_csv(all_rows, csv_path, header)
    written = [csv_path]
    if plot:
        png_path = out_dir / f"{figure_id}.png"
        render_plot(all_rows, png_path, axis)
        written.append(png_path)
    return written, n_failed


def render_plot(rows, path, axis: str):
    """Static D-vs-axis plot, one line per (curve tag, branch)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups = {}
    for row in rows:
        tag = row.flags.split(";", 1)[0]
        groups.setdefault((tag, row.branch), []).append(row)
    fig, ax = plt.subplots(figsize=(7, 5))
    for (tag, branch), grp in sorted(groups.items()):
        xs = [getattr(r, "omega" if axis == "omega" else "power") for r in grp]
        ys = [r.d for r in grp]
        style = "--" if branch == "middle" else "-"
        label = tag if branch in ("unique", "lower") else None
        ax.plot(xs, ys, style, label=label, linewidth=1.2)
    if axis == "power":
        ax.set_xscale("log")
        ax.set_xlabel("incident power P")
    else:
        ax.set_xlabel("omega / omega_q")
    ax.set_ylabel("transmission D")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
