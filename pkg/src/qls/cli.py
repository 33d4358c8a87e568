"""Command-line front end.

Exit codes: 0 success, 1 partial solver failure (> 10% of grid points),
2 configuration error. ``QLS_WORKERS`` overrides any worker-count setting.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .model import MicroscopicParams, derive_dimensionless
from .sweep import (
    PRESETS,
    load_config,
    render_plot,
    repro,
    run_sweep,
    validate_config,
    write_csv,
)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qls",
        description="Microwave transmission through qubit-loaded transmission lines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a sweep from a JSON config")
    p_sweep.add_argument("--config", required=True, help="path to JSON sweep config")
    p_sweep.add_argument("--out", default=None, help="CSV output path (overrides config)")
    p_sweep.add_argument("--workers", type=int, default=None, help="worker count (0 = auto)")
    p_sweep.add_argument("--plot", action="store_true", help="also render a PNG next to the CSV")

    p_repro = sub.add_parser("repro", help="run a bundled parameter preset")
    p_repro.add_argument("figure_id", choices=sorted(PRESETS))
    p_repro.add_argument("--out-dir", default=".", help="directory for the emitted files")
    p_repro.add_argument("--workers", type=int, default=0, help="worker count (0 = auto)")
    p_repro.add_argument("--plot", action="store_true", help="also render a PNG")

    p_val = sub.add_parser("validate", help="validate a sweep config without running it")
    p_val.add_argument("--config", required=True)

    p_der = sub.add_parser("derive", help="print dimensionless groups for a SI parameter file")
    p_der.add_argument("--config", required=True)

    return parser


def _cmd_sweep(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows, n_failed = run_sweep(config, workers=args.workers)
    out = args.out or config.output
    header = [f"qls sweep: solver={config.solver}", f"config: {args.config}"]
    if out:
        write_csv(rows, out, header)
        print(f"wrote {out} ({len(rows)} rows)")
        if args.plot:
            axis = "power" if "nonlinear" in config.solver or "closed" in config.solver else "omega"
            png = str(Path(out).with_suffix(".png"))
            render_plot(rows, png, axis)
            print(f"wrote {png}")
    else:
        for line in header:
            print(f"# {line}")
        from .sweep import CSV_COLUMNS, format_float

        print(",".join(CSV_COLUMNS))
        for row in rows:
            print(
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
    n_points = config.omega_grid.count * config.power_grid.count
    if n_failed > 0.1 * n_points:
        print(f"{n_failed}/{n_points} grid points failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_repro(args) -> int:
    try:
        written, n_failed = repro(
            args.figure_id, args.out_dir, plot=args.plot, workers=args.workers
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in written:
        print(f"wrote {path}")
    if n_failed:
        print(f"{n_failed} grid points failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_validate(args) -> int:
    ok, diagnostics = validate_config(args.config)
    for line in diagnostics:
        print(line)
    return EXIT_OK if ok else EXIT_CONFIG


def _cmd_derive(args) -> int:
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    block = data.get("microscopic_params", data)
    try:
        micro = MicroscopicParams(**block)
    except (TypeError, ValueError) as exc:
        print(f"config error: microscopic_params: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    params = derive_dimensionless(micro)
    print(f"interaction_eta = {params.interaction_eta:.12g}")
    print(f"coupling_g      = {params.coupling_g:.12g}")
    print(f"gamma_q         = {params.gamma_q:.12g}")
    print(f"line_damping    = {params.line_damping:.12g}")
    print(f"length_kl       = {params.length_kl:.12g}")
    print(f"spacing_ka      = {params.spacing_ka:.12g}")
    print(f"qubit_count     = {params.qubit_count}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "sweep": _cmd_sweep,
        "repro": _cmd_repro,
        "validate": _cmd_validate,
        "derive": _cmd_derive,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
