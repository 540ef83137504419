"""Batch front end.

Commands: simulate | picard | scatter | scan | selftest. Global flags:
--config PATH, --out DIR, --seed N, --override KEY=VAL (repeatable; flag
names mirror configuration key paths one-to-one). Exit codes: 0 success,
2 config error, 3 numerical abort, 4 non-convergence, 5 selftest failure.

Every output file embeds the canonical config hash and grid metadata. Text
outputs are written atomically; snapshot streams are flushed record by record
so an aborted evolution leaves its partial trajectory on disk.
"""

import argparse
import json
import os
import sys
from typing import List, Optional

from . import scans
from .config import ConfigError, RunConfig
from .evolve import (
    BlowupError,
    PicardDivergenceError,
    boundary_mass_fraction,
    evolve,
    picard_solve,
)
from .grid import GridError, SpectralField
from .io import SnapshotWriter, atomic_write_text
from .scatter import dispersive_decay_fit, extract_scattering_state
from .selftest import run_selftest
from .sobolev import hxy_norm, random_small_data
from .spacetime import instantaneous_qnorm
from .scans import RatioScanResult

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_NO_CONVERGENCE = 4
EXIT_SELFTEST = 5


def _load_config(args) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = RunConfig.parse(fh.read())
    else:
        cfg = RunConfig.defaults()
    overrides = list(args.override or [])
    if args.seed is not None:
        overrides.append(f"data.seed={args.seed}")
        overrides.append(f"scan.seed={args.seed}")
    return cfg.with_overrides(overrides)


def _out_path(args, name: str) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, name)


def _initial_data(cfg: RunConfig, grid) -> SpectralField:
    spec = cfg.sobolev_spec(grid)
    return random_small_data(
        grid,
        spec,
        cfg["data.delta"],
        decay_rate=cfg["data.decay_rate"],
        seed=cfg["data.seed"],
        envelope_width=cfg["data.envelope_width"],
        band_limit=cfg["data.band_limit"],
    )


def _csv_text(header_lines: List[str], columns: List[str], rows: List[List]) -> str:
    lines = [f"# {h}" for h in header_lines]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _meta_lines(cfg: RunConfig, grid) -> List[str]:
    return [
        f"config_hash={cfg.hash()}",
        f"grid=n:{grid.n},k:{grid.k},L:{grid.box_length!r},N_x:{grid.points_per_axis},"
        f"N_y:{grid.torus_modes},split:{grid.split_index}",
    ]


def cmd_simulate(cfg: RunConfig, args) -> int:
    grid = cfg.grid()
    evo = cfg.evolution()
    spec = cfg.sobolev_spec(grid)
    f = _initial_data(cfg, grid)
    qn = cfg["sim.qnorm"]
    margin = evo.boundary_margin

    writer = SnapshotWriter(_out_path(args, "trajectory.snaps"), grid, cfg.hash())
    rows = []

    def record(t, field):
        writer.write(t, field)
        rows.append(
            [
                t,
                field.l2_norm(),
                hxy_norm(field, spec),
                instantaneous_qnorm(field, qn),
                boundary_mass_fraction(field, margin),
            ]
        )

    try:
        evolve(f, evo, on_snapshot=record)
    except BlowupError as exc:
        writer.close()
        _write_norms_csv(cfg, grid, args, rows, qn)
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    writer.close()
    _write_norms_csv(cfg, grid, args, rows, qn)
    print(f"simulate: {len(rows)} snapshots -> {args.out or '.'}")
    return EXIT_OK


def _write_norms_csv(cfg, grid, args, rows, qn):
    text = _csv_text(
        _meta_lines(cfg, grid),
        ["time", "l2", "hxy", f"lq_x_l2_y(q={qn!r})", "boundary_mass_fraction"],
        rows,
    )
    atomic_write_text(_out_path(args, "norms.csv"), text)


def cmd_picard(cfg: RunConfig, args) -> int:
    grid = cfg.grid()
    evo = cfg.evolution()
    spec = cfg.sobolev_spec(grid)
    f = _initial_data(cfg, grid)
    trace_path = _out_path(args, "picard_trace.json")

    def trace_payload(trace, converged):
        return {
            "config_hash": cfg.hash(),
            "grid": _meta_lines(cfg, grid)[1].split("=", 1)[1],
            "converged": converged,
            "iterates": trace.iterates,
            "distances": trace.distances,
            "contraction_ratios": trace.ratios,
            "ball_radius": trace.ball_radius,
            "tol": trace.tol,
        }

    try:
        traj, trace = picard_solve(
            f, evo, tol=cfg["picard.tol"], max_iter=cfg["picard.max_iter"],
            spec=spec, eps=cfg["space.epsilon"],
        )
    except PicardDivergenceError as exc:
        atomic_write_text(trace_path, json.dumps(trace_payload(exc.trace, False), indent=2) + "\n")
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    with SnapshotWriter(_out_path(args, "fixed_point.snaps"), grid, cfg.hash()) as writer:
        for i in range(len(traj)):
            writer.write(float(traj.times[i]), traj.field(i))
    atomic_write_text(trace_path, json.dumps(trace_payload(trace, True), indent=2) + "\n")
    print(f"picard: converged in {trace.iterates} iterations; ratios {trace.ratios}")
    return EXIT_OK


def cmd_scatter(cfg: RunConfig, args) -> int:
    grid = cfg.grid()
    evo = cfg.evolution()
    spec = cfg.sobolev_spec(grid)
    f = _initial_data(cfg, grid)
    probes = list(cfg["scatter.probe_times"])
    try:
        traj = evolve(f, evo)
        f0, report = extract_scattering_state(traj, probes, spec=spec, eps=cfg["space.epsilon"])
        slope, resid = dispersive_decay_fit(traj, cfg["scatter.decay_q"], window=(probes[0], probes[-1]))
    except BlowupError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report.decay_slope = slope
    report.decay_residual = resid
    report.extras["config_hash"] = cfg.hash()
    report.extras["grid"] = _meta_lines(cfg, grid)[1].split("=", 1)[1]
    report.extras["boundary_mass_max"] = max(
        boundary_mass_fraction(traj.field(i), evo.boundary_margin) for i in range(len(traj))
    )
    atomic_write_text(_out_path(args, "scattering_report.json"), json.dumps(report.as_dict(), indent=2) + "\n")
    print(
        f"scatter: cauchy differences {report.cauchy_differences}, "
        f"terminal error {report.terminal_error:.3e}"
    )
    return EXIT_OK


def _run_scan(cfg: RunConfig, grid_override=None) -> RatioScanResult:
    scan_id = cfg["scan.id"]
    grid = grid_override if grid_override is not None else cfg.grid()
    common = dict(samples=cfg["scan.samples"], seed=cfg["scan.seed"])
    p, q = cfg["scan.p"], cfg["scan.q"]
    ft, nt = cfg["scan.final_time"], cfg["scan.n_times"]
    if scan_id == "strichartz":
        return scans.strichartz_scan(grid, p, q, m_list=cfg["scan.m_list"], final_time=ft, n_times=nt, **common)
    if scan_id == "derivative":
        alpha = cfg["scan.alpha"] or (0,) * grid.n
        return scans.derivative_strichartz_scan(
            grid, alpha, p, q, final_time=ft, n_times=nt, band_limit=cfg["scan.x_band_limit"], **common
        )
    if scan_id == "mixed":
        alpha = cfg["scan.alpha"] or (0,) * grid.n
        return scans.mixed_estimate_scan(grid, alpha, cfg["scan.r"], p, q, final_time=ft, n_times=nt, **common)
    if scan_id == "algebra":
        return scans.algebra_scan(grid.torus_modes, grid.k, cfg["scan.s"], **common)
    if scan_id == "leibniz":
        return _leibniz_scan(cfg, grid)
    if scan_id in ("trilinear-even", "trilinear-odd"):
        variant = scan_id.split("-")[1]
        return scans.trilinear_scan(grid, cfg["scan.eps"], variant=variant, final_time=ft, n_times=nt, **common)
    raise ConfigError(f"unknown scan.id {cfg['scan.id']!r}")


def _leibniz_scan(cfg: RunConfig, grid) -> RatioScanResult:
    alpha = cfg["scan.alpha"] or (1,) + (0,) * (grid.n - 1)
    band = cfg["scan.band_index"]
    residuals = []
    for i in range(cfg["scan.samples"]):
        hs = [
            scans.band_limit_x(scans.x_only_random(grid, cfg["scan.seed"] + 3 * i + j), grid, band)
            for j in range(3)
        ]
        residuals.append(scans.leibniz_residual(hs[0], hs[1], hs[2], alpha, grid))
    return RatioScanResult(
        inequality_id="leibniz",
        samples=cfg["scan.samples"],
        lhs=residuals,
        rhs=[0.0] * len(residuals),
        ratios=residuals,
        max_ratio=max(residuals),
        grid_meta={"n": grid.n, "points_per_axis": grid.points_per_axis, "band_index": band},
        extras={"alpha": list(alpha), "residual_bound_ok": bool(max(residuals) <= 1e-10)},
    )


def cmd_scan(cfg: RunConfig, args) -> int:
    try:
        result = _run_scan(cfg)
        if cfg["scan.double"]:
            if cfg["scan.id"] == "algebra":
                overrides = [f"grid.torus_modes={2 * cfg['grid.torus_modes']}"]
            else:
                # refine the whole space-time grid: double each axis and the
                # snapshot count
                overrides = [
                    f"grid.points_per_axis={2 * cfg['grid.points_per_axis']}",
                    f"scan.n_times={2 * (cfg['scan.n_times'] - 1) + 1}",
                ]
            refined = _run_scan(cfg.with_overrides(overrides))
            if result.max_ratio > 0:
                result.stability_delta = abs(refined.max_ratio - result.max_ratio) / result.max_ratio
            result.extras["refined_max_ratio"] = refined.max_ratio
    except (GridError, ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    parts = result.parts or [""] * len(result.ratios)
    rows = [[i, parts[i], result.lhs[i], result.rhs[i], result.ratios[i]] for i in range(len(result.ratios))]
    csv = _csv_text(
        [f"config_hash={cfg.hash()}", f"grid={json.dumps(result.grid_meta)}", f"inequality={result.inequality_id}"],
        ["sample", "part", "lhs", "rhs", "ratio"],
        rows,
    )
    atomic_write_text(_out_path(args, f"scan_{result.inequality_id}.csv"), csv)
    summary = result.summary()
    summary["config_hash"] = cfg.hash()
    atomic_write_text(_out_path(args, f"scan_{result.inequality_id}.json"), json.dumps(summary, indent=2) + "\n")
    print(f"scan {result.inequality_id}: max ratio {result.max_ratio:.6g}, stability {result.stability_delta}")
    return EXIT_OK


def cmd_selftest(cfg: RunConfig, args) -> int:
    verdict = run_selftest()
    verdict["config_hash"] = cfg.hash()
    text = json.dumps(verdict, indent=2) + "\n"
    if args.out:
        atomic_write_text(_out_path(args, "selftest.json"), text)
    print(text, end="")
    return EXIT_OK if verdict["passed"] else EXIT_SELFTEST


COMMANDS = {
    "simulate": cmd_simulate,
    "picard": cmd_picard,
    "scatter": cmd_scatter,
    "scan": cmd_scan,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prodnls", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="configuration file (key = value lines)")
    parser.add_argument("--out", help="output directory (default: current)")
    parser.add_argument("--seed", type=int, help="shorthand for data.seed and scan.seed")
    parser.add_argument(
        "--override",
        action="append",
        metavar="KEY=VAL",
        help="set one configuration key; repeatable",
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        code = COMMANDS[args.command](cfg, args)
    except (ConfigError, GridError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())
