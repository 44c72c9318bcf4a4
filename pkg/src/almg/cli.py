"""Command-line front end: one subcommand per dataset, CSV + JSON outputs.

Example:
  almg ced --N 120 --alpha -0.6 --xi-grid 0:1:100 --out out/ced
  almg qfs-scaling --xi 0.3 --alpha -0.6 --N-list 256,512,1024,2048 --out out/qfs
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__, dos, meanfield, observables, outputs, scaling
from .eigensolver import EigensolverError, full_spectrum, solve_sectors
from .model import ModelParams, ParitySector

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SUBCOMMANDS = (
    "spectrum", "ced", "meanfield", "contour", "dos",
    "gaps", "number", "pr", "qfs", "qfs-scaling", "threshold",
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- parsing

def parse_range(text: str) -> np.ndarray:
    """'a:b:steps' -> steps + 1 evenly spaced points from a to b."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"expected a:b:steps, got {text!r}")
    try:
        a, b, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}: {exc}") from None
    if steps < 0:
        raise ConfigError("steps must be >= 0")
    if steps == 0:
        return np.array([a])
    return np.linspace(a, b, steps + 1)


def parse_floats(text: str) -> list[float]:
    """Comma list of floats, or a single a:b:steps range."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        return [float(v) for v in parse_range(text)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}: {exc}") from None


def parse_ints(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}: {exc}") from None


def sectors_of(choice: str) -> tuple:
    return {
        "even": (ParitySector.EVEN,),
        "odd": (ParitySector.ODD,),
        "both": (ParitySector.EVEN, ParitySector.ODD),
    }[choice]


def tag(x: float) -> str:
    return format(float(x), "g")


def parity_sign(sector_value) -> int:
    return 1 if int(sector_value) == ParitySector.EVEN.value else -1


@contextmanager
def worker_map(jobs: int):
    """Order-preserving map over a process pool (builtin map for one job)."""
    if jobs <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield pool.map


def _sizes(args, default):
    if args.N_list is not None:
        Ns = parse_ints(args.N_list)
    elif args.N is not None:
        Ns = [args.N]
    else:
        Ns = list(default)
    return Ns


def _alphas(args, default):
    if args.alpha_list is not None:
        return parse_floats(args.alpha_list)
    if args.alpha is not None:
        return [args.alpha]
    return list(default)


def _xis(args, default):
    if args.xi_grid is not None:
        return [float(v) for v in parse_range(args.xi_grid)]
    if args.xi is not None:
        return [args.xi]
    return list(default)


def _one(values, name):
    if len(values) != 1:
        raise ConfigError(f"{name} takes a single value here, got {len(values)}")
    return values[0]


def _crit_or_none(xi, alpha):
    try:
        egs = meanfield.ground_state_energy(xi, alpha)
    except ValueError:
        return None, None, None, None
    sep1 = meanfield.f1(xi, alpha).excitation
    sep2 = meanfield.f2(xi, alpha).excitation
    return egs, sep1, sep2, meanfield.max_energy(xi, alpha)


# ---------------------------------------------------------------- workers

def _ced_job(job):
    N, xi, alpha = job
    try:
        spec = full_spectrum(ModelParams(N, xi, alpha))
    except EigensolverError as exc:
        raise EigensolverError(f"xi={xi}: {exc}") from exc
    return spec.energies, spec.sectors, spec.excitation_per_particle()


def _observable_job(job):
    kind, N, xi, alpha, sector_values = job
    params = ModelParams(N, xi, alpha)
    kind = observables.ObservableKind(kind)
    blocks = solve_sectors(params, vectors=kind is not observables.ObservableKind.GAP)
    e0 = min(b.eigenvalues[0] for b in blocks.values())
    fn = {
        observables.ObservableKind.GAP: observables.energy_gaps,
        observables.ObservableKind.NUMBER: observables.number_expectation,
        observables.ObservableKind.PR: observables.participation_ratio,
        observables.ObservableKind.QFS: observables.qfs_series,
    }[kind]
    parts = [fn(blocks[ParitySector(v)], params, e0) for v in sector_values]
    insets = []
    if kind is observables.ObservableKind.PR:
        for part in parts:
            blk = blocks[part.sector]
            for k in observables.interior_minima(part):
                c2 = observables.squared_components(blk, int(k))
                for n, w in zip(blk.basis_n, c2):
                    insets.append((parity_sign(part.sector.value), int(k), part.excitation_per_particle[k], int(n), w))
    series = parts[0] if len(parts) == 1 else observables.merge_series(parts)
    return series, insets


def _dos_job(job):
    eps, xi, alpha = job
    return dos.dos_value(eps, xi, alpha)


def _histogram_job(job):
    N, xi, alpha, bins = job
    params = ModelParams(N, xi, alpha)
    hist = dos.histogram_dos(full_spectrum(params), bins)
    return hist.epsilons, hist.values, hist.meta["edges"], dos.bin_averaged_dos(params, hist.meta["edges"])


# ---------------------------------------------------------------- commands

def cmd_spectrum(args, out: Path, mapper):
    N = _one(_sizes(args, [120]), "--N")
    xi = _one(_xis(args, [0.5]), "--xi")
    alpha = _one(_alphas(args, [0.0]), "--alpha")
    params = ModelParams(N, xi, alpha)
    spec = full_spectrum(params)
    path = outputs.write_columns(out / "spectrum.csv", {
        "level_index": np.arange(len(spec.energies)),
        "parity": [parity_sign(s) for s in spec.sectors],
        "index_in_sector": spec.index_in_sector,
        "E": spec.energies,
        "E_over_N": spec.energies / N,
        "exc_over_N": spec.excitation_per_particle(),
    })
    summary = outputs.write_json(out / "spectrum_summary.json", {
        "params": params.as_dict(),
        "ground_energy": spec.ground_energy,
        "ground_energy_per_particle": spec.ground_energy / N,
        "ground_sector": spec.ground_sector.label,
        "meanfield_ground_energy": _crit_or_none(xi, alpha)[0],
    })
    return {"N": N, "xi": xi, "alpha": alpha}, [path, summary]


def cmd_ced(args, out: Path, mapper):
    N = _one(_sizes(args, [120]), "--N")
    alpha = _one(_alphas(args, [0.0]), "--alpha")
    xis = _xis(args, parse_range("0:1:100"))
    if not xis:
        raise ConfigError("empty xi grid")
    for xi in xis:
        if not 0.0 <= xi <= 1.0:
            raise ConfigError(f"xi grid point {xi} outside [0, 1]")
    results = list(mapper(_ced_job, [(N, xi, alpha) for xi in xis]))
    rows = []
    for xi, (energies, sectors, exc) in zip(xis, results):
        for k in range(len(energies)):
            rows.append((xi, k, parity_sign(sectors[k]), energies[k], exc[k]))
    levels = outputs.write_csv(out / "ced.csv", ["xi", "level_index", "parity", "E", "exc_over_N"], rows)
    overlay = outputs.write_csv(
        out / "ced_overlay.csv",
        ["xi", "E_gs", "f1", "f2", "E_max"],
        [(xi, *_crit_or_none(xi, alpha)) for xi in xis],
    )
    return {"N": N, "alpha": alpha, "xi_grid": xis}, [levels, overlay]


def cmd_meanfield(args, out: Path, mapper):
    xis = _xis(args, [0.6])
    alphas = _alphas(args, [-0.6])
    pts, seps = [], []
    for xi in xis:
        for alpha in alphas:
            for sp in meanfield.stationary_points(xi, alpha):
                pts.append((xi, alpha, sp.label.name, sp.q_sq, sp.p_sq, sp.energy, sp.exists))
            seps.append((xi, alpha, *_crit_or_none(xi, alpha), meanfield.alpha_threshold(xi)))
    a = outputs.write_csv(
        out / "meanfield_stationary.csv",
        ["xi", "alpha", "label", "q_sq", "p_sq", "energy", "exists"], pts,
    )
    b = outputs.write_csv(
        out / "meanfield_separatrices.csv",
        ["xi", "alpha", "E_gs", "f1", "f2", "E_max", "alpha_th"], seps,
    )
    return {"xi": xis, "alpha": alphas}, [a, b]


def cmd_contour(args, out: Path, mapper):
    xi = _one(_xis(args, [0.6]), "--xi")
    alpha = _one(_alphas(args, [-0.6]), "--alpha")
    res = args.resolution or 201
    grid = meanfield.contour_grid(xi, alpha, res)
    path = outputs.write_csv(out / "contour.csv", ["q", "p", "energy", "in_domain"], grid.rows())
    return {"xi": xi, "alpha": alpha, "resolution": res}, [path]


def cmd_dos(args, out: Path, mapper):
    xi = _one(_xis(args, [0.6]), "--xi")
    alphas = _alphas(args, [-0.6])
    N = _one(_sizes(args, [2000]), "--N")
    bins = args.bins or 50
    points = args.resolution or 400
    if bins < 10:
        raise ConfigError("--bins must be >= 10")
    written, summary = [], {}
    for alpha in alphas:
        params = ModelParams(N, xi, alpha)
        grid = dos.offset_grid(
            dos.default_grid(params, points),
            [*meanfield.critical_energies(xi, alpha).values(), xi],
        )
        nu = np.array(list(mapper(_dos_job, [(e, xi, alpha) for e in grid])))
        curve = dos.DosCurve(grid, nu, params)
        analytic = outputs.write_columns(out / f"dos_analytic_alpha{tag(alpha)}.csv", {"epsilon": grid, "nu": nu})
        written += [analytic, outputs.write_sidecar(analytic, {"xi": xi, "alpha": alpha, "quadrature_tol": dos.QUAD_TOL})]
        centers, density, edges, avg = _histogram_job((N, xi, alpha, bins))
        hist = outputs.write_columns(
            out / f"dos_histogram_alpha{tag(alpha)}_N{N}.csv",
            {"epsilon": centers, "nu": density, "bin_lo": edges[:-1], "bin_hi": edges[1:], "nu_analytic_bin_avg": avg},
        )
        written += [hist, outputs.write_sidecar(hist, {"N": N, "xi": xi, "alpha": alpha, "bins": bins})]
        summary[tag(alpha)] = {
            "integral": curve.integral(),
            "local_maxima": dos.local_maxima(curve),
            "critical_energies": meanfield.critical_energies(xi, alpha),
        }
    written.append(outputs.write_json(out / "dos_summary.json", summary))
    return {"xi": xi, "alpha": alphas, "N": N, "bins": bins, "points": points}, written


def _observable_command(kind: observables.ObservableKind, default_xi, default_alpha, default_N):
    def run(args, out: Path, mapper):
        xi = _one(_xis(args, [default_xi]), "--xi")
        alphas = _alphas(args, default_alpha)
        Ns = _sizes(args, default_N)
        if not alphas or not Ns:
            raise ConfigError("empty alpha or N list")
        sector_values = tuple(s.value for s in sectors_of(args.sector))
        jobs = [(kind.value, N, xi, a, sector_values) for a in alphas for N in Ns]
        written = []
        for (_, N, _, alpha, _), (series, insets) in zip(jobs, mapper(_observable_job, jobs)):
            cols = {"index": series.state_index}
            if series.parity is not None:
                cols["parity"] = [parity_sign(v) for v in series.parity]
            cols.update({
                "energy": series.energy,
                "E_over_N": series.energy_per_particle,
                "exc_over_N": series.excitation_per_particle,
                "value": series.value,
            })
            if series.value_normalized is not None:
                cols["value_normalized"] = series.value_normalized
            stem = f"{kind.value}_alpha{tag(alpha)}_N{N}"
            csv_path = outputs.write_columns(out / f"{stem}.csv", cols)
            meta = {"params": series.params.as_dict(), "sector": args.sector, "kind": kind.value, **series.meta}
            written += [csv_path, outputs.write_sidecar(csv_path, meta)]
            if kind is observables.ObservableKind.PR:
                written.append(outputs.write_csv(
                    out / f"{stem}_insets.csv",
                    ["parity", "state_index", "exc_over_N", "n", "c_sq"], insets,
                ))
        return {"kind": kind.value, "xi": xi, "alpha": alphas, "N": Ns, "sector": args.sector}, written

    return run


def cmd_qfs_scaling(args, out: Path, mapper):
    xi = _one(_xis(args, [0.3]), "--xi")
    alpha = _one(_alphas(args, [-0.6]), "--alpha")
    Ns = _sizes(args, [256, 512, 1024, 2048, 4096])
    if len(Ns) < 3:
        raise ConfigError("qfs-scaling needs at least 3 system sizes")
    if args.sector == "both":
        raise ConfigError("qfs-scaling runs on one parity sector; use --sector even or odd")
    sector = sectors_of(args.sector)[0]
    peaks, curves = scaling.qfs_peak_scaling(xi, alpha, Ns, sector=sector, mapper=mapper)
    written = []
    for N, eps, chi in curves:
        written.append(outputs.write_columns(
            out / f"qfs_curve_N{N}.csv",
            {"index": np.arange(len(eps)), "E_over_N": eps, "value": chi, "value_normalized": chi / N**2},
        ))
    rows, report = [], {}
    for name, pk in peaks.items():
        for N, x, y, err in zip(pk.Ns, pk.positions, pk.heights, pk.position_errors):
            rows.append((name, N, x, y, err))
        written.append(outputs.write_columns(out / f"qfs_height_{name}.csv", {"N": pk.Ns, "value": pk.heights}))
        written.append(outputs.write_columns(out / f"qfs_position_{name}.csv", {"N": pk.Ns, "value": pk.position_errors}))
        h, p = pk.height_fit(), pk.position_fit()
        report[name] = {
            "critical_energy": pk.critical_energy,
            "height_exponent": h.exponent,
            "height_exponent_stderr": h.exponent_stderr,
            "height_prefactor": h.prefactor,
            "position_exponent": p.exponent,
            "position_exponent_stderr": p.exponent_stderr,
            "position_prefactor": p.prefactor,
        }
    written.append(outputs.write_csv(out / "qfs_peaks.csv", ["peak", "N", "position", "height", "position_error"], rows))
    written.append(outputs.write_json(out / "qfs_fits.json", report))
    return {"xi": xi, "alpha": alpha, "N": Ns, "sector": args.sector}, written


def cmd_threshold(args, out: Path, mapper):
    xi = _one(_xis(args, [0.2]), "--xi")
    alphas = _alphas(args, parse_range("-0.8:-0.1:35"))
    Ns = _sizes(args, [200, 400, 800, 1600])
    pts = scaling.threshold_scan(xi, alphas, Ns, mapper=mapper)
    diffs = [p.difference for p in pts]
    main_csv = outputs.write_columns(out / "threshold.csv", {"alpha": alphas, "Ecl_minus_f2": diffs})
    fit_rows = [
        (p.alpha, p.fit.E_cl, p.fit.c, p.fit.b, p.fit.residual_norm, p.fit.identifiable, p.f2, *p.emax)
        for p in pts
    ]
    fits_csv = outputs.write_csv(
        out / "threshold_fits.csv",
        ["alpha", "E_cl", "c", "b", "residual_norm", "identifiable", "f2", *[f"Emax_N{N}" for N in Ns]],
        fit_rows,
    )
    try:
        crossing, note = scaling.threshold_crossing(alphas, diffs), None
    except scaling.FitError as exc:
        crossing, note = None, str(exc)
        print(f"warning: {note}", file=sys.stderr)
    report = outputs.write_json(out / "threshold.json", {
        "xi": xi, "crossing_alpha": crossing, "note": note, "alpha_th": meanfield.alpha_threshold(xi),
    })
    return {"xi": xi, "alpha": alphas, "N": Ns}, [main_csv, fits_csv, report]


COMMANDS = {
    "spectrum": cmd_spectrum,
    "ced": cmd_ced,
    "meanfield": cmd_meanfield,
    "contour": cmd_contour,
    "dos": cmd_dos,
    "gaps": _observable_command(observables.ObservableKind.GAP, 0.15, [0.0, -0.3, -0.4, -0.6], [120, 1200]),
    "number": _observable_command(observables.ObservableKind.NUMBER, 0.6, [0.0, -0.3, -0.4, -0.6], [600]),
    "pr": _observable_command(observables.ObservableKind.PR, 0.6, [0.0, -0.3, -0.4, -0.6], [600]),
    "qfs": _observable_command(observables.ObservableKind.QFS, 0.3, [-0.6], [256, 512, 1024, 2048, 4096]),
    "qfs-scaling": cmd_qfs_scaling,
    "threshold": cmd_threshold,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, default=None, help="number of particles (even)")
    common.add_argument("--xi", type=float, default=None, help="control parameter in [0, 1]")
    common.add_argument("--alpha", type=float, default=None, help="anharmonicity")
    common.add_argument("--xi-grid", dest="xi_grid", default=None, metavar="A:B:STEPS",
                        help="STEPS + 1 evenly spaced xi values from A to B")
    common.add_argument("--alpha-list", dest="alpha_list", default=None,
                        help="comma list of alpha values, or A:B:STEPS")
    common.add_argument("--N-list", dest="N_list", default=None, help="comma list of system sizes")
    common.add_argument("--bins", type=int, default=None, help="histogram bins (dos)")
    common.add_argument("--resolution", type=int, default=None,
                        help="grid points per axis (contour) or energy points (dos)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    common.add_argument("--sector", choices=("even", "odd", "both"), default="even")

    ap = argparse.ArgumentParser(prog="almg", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"almg {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    t0 = time.perf_counter()
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        with worker_map(args.jobs) as mapper:
            config, written = COMMANDS[args.subcommand](args, out, mapper)
    except (EigensolverError, scaling.FitError, FloatingPointError, ArithmeticError) as exc:
        print(f"almg {args.subcommand}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"almg {args.subcommand}: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    config = {"subcommand": args.subcommand, **config, "jobs": args.jobs}
    outputs.write_manifest(out, args.subcommand, config, ["almg", *argv], written, time.perf_counter() - t0)
    for p in written:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
