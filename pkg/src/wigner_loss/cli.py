"""Command-line interface: ``wigner-loss <subcommand> ...``.

Every file is written to a temporary sibling and renamed into place only after
the whole computation succeeded, so a failing run leaves no partial output.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .closed_forms import (
    CURVE_FAMILIES,
    CURVE_N_BARS,
    DomainError,
    abs_w0_curve,
    asymptote_w0,
    asymptote_w0_rate2,
    epsilon_samples,
    family_params_for_mean,
)
from .channel import check_eta
from .fock import CutoffError, validate_density
from .negativity import default_grid, negativity_report, threshold_eta
from .qpd import CoverageWarning, PhaseGrid, lossy_qpd_grid, w0_parity_series
from .states import StateParameterError, StateSpec, mean_quanta, purity
from .verify import VerifyConfig, run_verify

COVERAGE_LIMIT = 1e-8
CURVE_COLUMNS = ("epsilon", "abs_w0_fock", "abs_w0_cat", "abs_w0_sqz", "asy_paper", "asy_rate2")


@dataclass(frozen=True)
class RunConfig:
    tail_tol: float = 1e-10
    points: int = 201
    extent: float | None = None
    tol: float = 1e-3
    out: Path | None = None

    def __post_init__(self):
        if not self.tail_tol > 0 or not self.tol > 0:
            raise ValueError("tolerances must be positive")
        if self.points < 1 or self.points % 2 == 0:
            raise ValueError(f"--points must be odd and positive, got {self.points}")
        if self.extent is not None and not self.extent > 0:
            raise ValueError(f"--extent must be positive, got {self.extent}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        return cls(args.tail_tol, args.points, args.extent, args.tol, Path(args.out) if args.out else None)

    def grid_for(self, rho: np.ndarray) -> PhaseGrid:
        auto = default_grid(rho, self.points)
        return auto if self.extent is None else PhaseGrid(auto.center, self.extent, self.points)


class CliError(Exception):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_ready(obj):
    """Replace NaN/inf by None so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json(obj) -> str:
    return json.dumps(_json_ready(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def load_spec(path: str) -> StateSpec:
    try:
        return StateSpec.load(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read state spec {path}: {exc}") from exc


def build_state(spec: StateSpec, cfg: RunConfig) -> np.ndarray:
    return spec.build(cfg.tail_tol)


def cmd_state_validate(args, cfg: RunConfig) -> int:
    spec = load_spec(args.spec)
    rho = build_state(spec, cfg)
    diag = validate_density(rho, tail_tol=cfg.tail_tol)
    doc = {
        "state": spec.to_dict(),
        "cutoff": len(rho),
        "mean_quanta": mean_quanta(rho),
        "purity": purity(rho),
        "diagnostics": diag.to_dict(),
        "valid": diag.valid,
    }
    emit(to_json(doc), cfg.out)
    return 0 if doc["valid"] else 1


def cmd_wigner_grid(args, cfg: RunConfig) -> int:
    spec = load_spec(args.spec)
    eta = check_eta(args.eta)
    rho = build_state(spec, cfg)
    grid = cfg.grid_for(rho)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoverageWarning)
        qg = lossy_qpd_grid(rho, eta, args.s, grid)
    boundary = qg.boundary_max()
    if boundary > COVERAGE_LIMIT:
        raise CliError(f"grid does not cover the state: boundary |W| = {boundary:.3g} > {COVERAGE_LIMIT:g}; raise --extent")
    sidecar = {
        "state": spec.to_dict(),
        "eta": eta,
        "s": args.s,
        "cutoff": len(rho),
        "grid": grid.to_dict(),
        "normalization": qg.normalization(),
        "boundary_max": boundary,
        "covered": True,
        "min_value": qg.values.min(),
    }
    lines = ["# alpha_re, alpha_im, value"]
    alphas = grid.alphas()
    for a, v in zip(alphas.ravel(), qg.values.ravel()):
        lines.append(f"{fmt(a.real)},{fmt(a.imag)},{fmt(v)}")
    csv_text = "\n".join(lines) + "\n"
    if cfg.out is None:
        sys.stdout.write(csv_text)
        sys.stderr.write(to_json(sidecar))
    else:
        atomic_write(cfg.out, csv_text)
        atomic_write(cfg.out.with_suffix(".json"), to_json(sidecar))
    return 0


def curve_table(n_bar: float, verify: bool = False, tail_tol: float = 1e-10) -> tuple[list[str], np.ndarray, list[str]]:
    """Columns, rows and problems for one n_bar; infeasible families give NaN columns."""
    eps = epsilon_samples()
    cols, notes, residuals = [eps], [], []
    for family in CURVE_FAMILIES:
        try:
            cols.append(abs_w0_curve(family, n_bar, eps))
        except DomainError as exc:
            notes.append(f"{family} at n_bar={n_bar:g}: {exc}")
            cols.append(np.full(eps.size, np.nan))
            residuals.append(np.full(eps.size, np.nan))
            continue
        if verify:
            residuals.append(_curve_residuals(family, n_bar, eps, cols[-1], tail_tol))
    cols.append(np.array([abs(asymptote_w0(e)) for e in eps]))
    cols.append(np.array([abs(asymptote_w0_rate2(e)) for e in eps]))
    names = list(CURVE_COLUMNS)
    if verify:
        names += ["resid_fock", "resid_cat", "resid_sqz"]
        cols += residuals
    return names, np.column_stack(cols), notes


def _curve_residuals(family, n_bar, eps, curve, tail_tol) -> np.ndarray:
    """|W0| from the parity series of the constructed state minus the closed-form column."""
    rho = family_params_for_mean(family, n_bar).build(tail_tol)
    out = np.full(eps.size, np.nan)
    for i, e in enumerate(eps):
        if not math.isnan(curve[i]):
            out[i] = abs(w0_parity_series(rho, 1.0 - e / n_bar)) - curve[i]
    return out


def cmd_w0_curve(args, cfg: RunConfig) -> int:
    out_dir = cfg.out if cfg.out is not None else Path(".")
    if out_dir.exists() and not out_dir.is_dir():
        raise CliError(f"--out must be a directory for w0-curve, got file {out_dir}")
    tables = []
    for n_bar in args.n_bar:
        if not n_bar >= 1:
            raise CliError(f"mean photon number must be >= 1, got {n_bar}")
        names, rows, notes = curve_table(n_bar, args.verify, cfg.tail_tol)
        for note in notes:
            print(f"warning: {note}", file=sys.stderr)
        tables.append((n_bar, names, rows))
    for n_bar, names, rows in tables:
        text = "# " + ", ".join(names) + "\n"
        text += "".join(",".join(fmt(v) for v in row) + "\n" for row in rows)
        atomic_write(out_dir / f"w0_curve_nbar{n_bar:g}.csv", text)
    return 0


def cmd_threshold(args, cfg: RunConfig) -> int:
    spec = load_spec(args.spec)
    rho = build_state(spec, cfg)
    grid = cfg.grid_for(rho)
    eta_star = threshold_eta(rho, cfg.tol, grid, cfg.tail_tol)
    doc = {
        "state": spec.to_dict(),
        "eta_star": eta_star,
        "tol": cfg.tol,
        "report": negativity_report(rho, 1.0, grid).to_dict(),
    }
    emit(to_json(doc), cfg.out)
    return 0


def cmd_negativity_report(args, cfg: RunConfig) -> int:
    spec = load_spec(args.spec)
    rho = build_state(spec, cfg)
    report = negativity_report(rho, check_eta(args.eta), cfg.grid_for(rho))
    emit(to_json({"state": spec.to_dict(), "report": report.to_dict()}), cfg.out)
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    vcfg = VerifyConfig(cfg.tail_tol, cfg.points, cfg.extent, cfg.tol)

    def log(res):
        print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail} ({res.seconds:.1f}s)", file=sys.stderr)

    results = run_verify(vcfg, log=log)
    failed = [r.name for r in results if not r.passed]
    doc = {
        "config": {"tail_tol": cfg.tail_tol, "points": cfg.points, "extent": cfg.extent, "tol": cfg.tol},
        "passed": not failed,
        "failed": failed,
        "properties": [r.to_dict() for r in results],
    }
    emit(to_json(doc), cfg.out)
    if failed:
        print(f"verify failed: {', '.join(failed)}", file=sys.stderr)
    return 0 if not failed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tail-tol", type=float, default=1e-10, help="Fock tail mass for auto cutoffs")
    common.add_argument("--points", type=int, default=201, help="grid points per axis (odd)")
    common.add_argument("--extent", type=float, default=None, help="grid half extent (default: auto)")
    common.add_argument("--tol", type=float, default=1e-3, help="threshold bisection tolerance")
    common.add_argument("--out", default=None, help="output file (directory for w0-curve)")

    parser = argparse.ArgumentParser(prog="wigner-loss", description="Wigner negativity under photon loss")
    sub = parser.add_subparsers(dest="command", required=True)

    state = sub.add_parser("state", help="state utilities")
    state_sub = state.add_subparsers(dest="state_command", required=True)
    validate = state_sub.add_parser("validate", parents=[common], help="build a state and report diagnostics")
    validate.add_argument("spec")
    validate.set_defaults(func=cmd_state_validate)

    grid = sub.add_parser("wigner-grid", parents=[common], help="lossy QPD on a grid, as CSV")
    grid.add_argument("spec")
    grid.add_argument("--eta", type=float, default=1.0)
    grid.add_argument("--s", type=float, default=0.0)
    grid.set_defaults(func=cmd_wigner_grid)

    curve = sub.add_parser("w0-curve", parents=[common], help="|W0| against lost quanta, one CSV per mean photon number")
    curve.add_argument("--n-bar", type=float, nargs="+", default=list(CURVE_N_BARS))
    curve.add_argument("--verify", action="store_true", help="add numeric-minus-closed-form residual columns")
    curve.set_defaults(func=cmd_w0_curve)

    thr = sub.add_parser("threshold", parents=[common], help="efficiency below which negativity vanishes")
    thr.add_argument("spec")
    thr.set_defaults(func=cmd_threshold)

    neg = sub.add_parser("negativity-report", parents=[common], help="minimum and negative volume at one efficiency")
    neg.add_argument("spec")
    neg.add_argument("--eta", type=float, default=1.0)
    neg.set_defaults(func=cmd_negativity_report)

    ver = sub.add_parser("verify", parents=[common], help="run the property battery")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        return args.func(args, cfg)
    except (CliError, ValueError, CutoffError, StateParameterError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
