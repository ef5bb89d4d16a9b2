"""Command-line front end: config handling, dispatch, persistence.

Commands: bands, spectrum, solve, reduce, multibump, sweep, verify.
Artifacts land in the directory named by GAPBUMPS_OUT (default: the
working directory) together with a manifest recording the config hash,
package versions, timings and artifact names. Result files themselves
carry no timings, so identical config and seed reproduce them byte for
byte.

Exit codes: 0 success, 2 bad config or arguments, 3 numeric failure
(no gap, collapse, no convergence, unstable gluing), 4 failed
verification.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import os
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__, presets
from .functional import Nonlinearity
from .multibump import (
    CentersCollide,
    GluingUnstable,
    SeparationTooSmall,
    build_problem,
    separation_sweep,
    solve_multibump,
)
from .operator import (
    NotInvertible,
    PeriodicPotential,
    band_samples,
    diagonalize,
    midgap_shift,
)
from .reduction import AllKernel, OutOfBall, classify_origin, detect_kernel, kernel_combination, solve_w
from .solver import (
    NoConvergence,
    SolutionRecord,
    SolverOptions,
    TrivialCollapse,
    find_critical_point,
    initial_ansatz,
)
from .torus import GridField, TorusDomain


class ConfigError(Exception):
    pass


# Canonical config shape. None marks optional fields; unknown keys are
# rejected so typos fail loudly instead of silently using a default.
_DEFAULT_CONFIG: dict = {
    "domain": {"dim": 1, "cells": 8, "samples_per_cell": 16},
    "potential": {
        "kind": "cosine",
        "amplitude": 30.0,
        "shift": "auto-midgap",
        "samples": None,
        "axes": None,
    },
    "nonlinearity": {
        "p": 4.0,
        "q": 3.0,
        "gamma": 4.0,
        "h": None,
        "dealias": False,
        "dealias_factor": 1.5,
    },
    "solver": {
        "newton_tol": 1e-10,
        "max_iters": 200,
        "backtrack": 0.5,
        "sufficient_decrease": 1e-4,
        "tikhonov": 1e-8,
        "tikhonov_cap": 1e-2,
        "deflation_radius": 0.5,
        "collapse_norm": 1e-3,
    },
    "seed": 0,
    "ansatz": {"center": None, "width": 0.5, "amplitude": 6.0},
}


def _merge(defaults: dict, given: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config field {where!r}")
        if isinstance(defaults[key], dict) and defaults[key] is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"config field {where!r} must be an object")
            out[key] = _merge(defaults[key], value, where)
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration: the canonical dict plus resolved objects.

    `raw` keeps the shift spec verbatim ("auto-midgap" stays a string),
    so dumping it reproduces the input file; `potential` carries the
    resolved numeric shift used by every computation.
    """

    raw: dict
    domain: TorusDomain
    potential: PeriodicPotential
    nonlinearity: Nonlinearity
    solver: SolverOptions
    seed: int
    ansatz: dict

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    @property
    def config_hash(self) -> str:
        js = json.dumps(self.raw, sort_keys=True)
        return hashlib.sha256(js.encode()).hexdigest()[:16]


def _potential_from_dict(d: dict) -> PeriodicPotential:
    shift = d.get("shift", 0.0)
    if shift == "auto-midgap":
        if d.get("kind", "cosine") != "cosine":
            raise ConfigError("potential.shift 'auto-midgap' requires kind 'cosine'")
        shift = midgap_shift(float(d.get("amplitude", 0.0)))
    try:
        return PeriodicPotential(
            kind=d.get("kind", "cosine"),
            amplitude=float(d.get("amplitude", 0.0)),
            shift=float(shift),
            samples=tuple(d["samples"]) if d.get("samples") else None,
            axes=tuple(d["axes"]) if d.get("axes") is not None else None,
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"potential: {e}") from e


def _nonlinearity_from_dict(d: dict) -> Nonlinearity:
    try:
        return Nonlinearity(
            p=float(d.get("p", 4.0)),
            q=float(d.get("q", 3.0)),
            gamma=float(d.get("gamma", 4.0)),
            weight=_potential_from_dict(d["h"]) if d.get("h") else None,
            dealias=bool(d.get("dealias", False)),
            dealias_factor=float(d.get("dealias_factor", 1.5)),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"nonlinearity: {e}") from e


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Defaults <- file <- flag overrides, validated field by field."""
    given: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read {path}: {e}") from e
        try:
            given = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}"
            ) from e
        if not isinstance(given, dict):
            raise ConfigError(f"{path}: top level must be an object")
    raw = _merge(_DEFAULT_CONFIG, given)
    for dotted, value in (overrides or {}).items():
        node = raw
        *parents, leaf = dotted.split(".")
        for p in parents:
            node = node[p]
        node[leaf] = value

    dom = raw["domain"]
    try:
        domain = TorusDomain(int(dom["dim"]), int(dom["cells"]), int(dom["samples_per_cell"]))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"domain: {e}") from e
    potential = _potential_from_dict(raw["potential"])
    nl = _nonlinearity_from_dict(raw["nonlinearity"])
    try:
        solver = SolverOptions(**{k: v for k, v in raw["solver"].items()})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"solver: {e}") from e
    seed = raw["seed"]
    if not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")

    ansatz = dict(raw["ansatz"])
    if ansatz.get("center") is None:
        ansatz["center"] = [0.0] * domain.dim
    if len(ansatz["center"]) != domain.dim:
        raise ConfigError(
            f"ansatz.center has {len(ansatz['center'])} coordinates, domain is {domain.dim}-d"
        )
    return RunConfig(
        raw=raw,
        domain=domain,
        potential=potential,
        nonlinearity=nl,
        solver=solver,
        seed=seed,
        ansatz=ansatz,
    )


# -- persistence -----------------------------------------------------------------


def _outdir() -> Path:
    out = Path(os.environ.get("GAPBUMPS_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=_scalar) + "\n")


def _scalar(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not JSON-serializable: {type(x).__name__}")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_field_csv(path: Path, field: GridField) -> None:
    dim = field.domain.dim
    grids = [g.reshape(-1) for g in field.domain.meshgrid()]
    header = [f"x{i + 1}" for i in range(dim)] + ["value"]
    rows = zip(*grids, (float(v) for v in field.flat))
    _write_csv(path, header, ([float(c) for c in row] for row in rows))


def read_field_csv(path: Path, domain: TorusDomain) -> GridField:
    with path.open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != domain.dim + 1:
            raise ConfigError(
                f"{path}: expected {domain.dim + 1} columns for a {domain.dim}-d field, "
                f"got {len(header)}"
            )
        values = [float(row[-1]) for row in reader if row]
    if len(values) != domain.num_points:
        raise ConfigError(
            f"{path}: {len(values)} rows, domain has {domain.num_points} grid points"
        )
    return GridField(domain, np.asarray(values))


def _record_from_file(path: str, cfg: RunConfig):
    """Load a solution: record JSON (self-describing) or bare field CSV.

    A CSV has no fingerprints, so the active config supplies domain,
    potential and nonlinearity; the record's diagnostics are recomputed.
    Returns (record, decomposition, nonlinearity).
    """
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"no such solution file: {path}")
    if p.suffix == ".csv":
        S = diagonalize(cfg.potential, cfg.domain)
        field = read_field_csv(p, cfg.domain)
        return _rebuild_record(field, S, cfg.nonlinearity), S, cfg.nonlinearity
    try:
        d = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    for key in ("domain", "potential", "nonlinearity", "values"):
        if key not in d:
            raise ConfigError(f"{path}: not a solution record (missing {key!r})")
    dom = d["domain"]
    domain = TorusDomain(int(dom["dim"]), int(dom["cells"]), int(dom["samples_per_cell"]))
    potential = _potential_from_dict(d["potential"])
    nl = _nonlinearity_from_dict(d["nonlinearity"])
    S = diagonalize(potential, domain)
    field = GridField(domain, np.asarray(d["values"]))
    rec = SolutionRecord(
        field=field,
        energy=float(d["energy"]),
        residual=float(d["residual"]),
        norm_k=float(d["norm_k"]),
        negative_hessian_count=int(d["negative_hessian_count"]),
        kernel_dim_estimate=int(d["kernel_dim_estimate"]),
        iterations=int(d["iterations"]),
        residual_history=tuple(float(r) for r in d["residual_history"]),
        domain_fingerprint=dict(dom),
        potential_fingerprint=dict(d["potential"]),
        nonlinearity_fingerprint=dict(d["nonlinearity"]),
    )
    return rec, S, nl


def _rebuild_record(field: GridField, S, nl: Nonlinearity) -> SolutionRecord:
    from .functional import a_hessian, a_value_and_gradient
    import scipy.linalg

    a = S.a_from_field(field)
    energy, g = a_value_and_gradient(S, nl, a)
    mu = scipy.linalg.eigvalsh(a_hessian(S, nl, a))
    scale = float(np.abs(mu).max())
    near = np.abs(mu) < 1e-4 * scale
    dom = S.domain
    return SolutionRecord(
        field=field,
        energy=float(energy),
        residual=float(np.linalg.norm(g)),
        norm_k=float(np.linalg.norm(a)),
        negative_hessian_count=int(((mu < 0) & ~near).sum()),
        kernel_dim_estimate=int(near.sum()),
        iterations=0,
        residual_history=(),
        domain_fingerprint={
            "dim": dom.dim,
            "cells": dom.cells,
            "samples_per_cell": dom.samples_per_cell,
        },
        potential_fingerprint=S.potential.to_dict(),
        nonlinearity_fingerprint=nl.to_dict(),
    )


def _write_manifest(
    outdir: Path, command: str, cfg: RunConfig, artifacts: list[str], started: float
) -> None:
    _write_json(
        outdir / "manifest.json",
        {
            "command": command,
            "config_hash": cfg.config_hash,
            "seed": cfg.seed,
            "versions": {
                "gapbumps": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "timings": {"total_s": round(time.monotonic() - started, 3)},
            "artifacts": artifacts,
        },
    )


# -- commands --------------------------------------------------------------------


def _parse_centers(text: str, dim: int) -> list[tuple[int, ...]]:
    centers = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        coords = tuple(int(c) for c in part.split(","))
        if len(coords) != dim:
            raise ConfigError(
                f"center {part!r} has {len(coords)} coordinates, domain is {dim}-d"
            )
        centers.append(coords)
    if not centers:
        raise ConfigError("no centers given")
    return centers


def cmd_bands(args, cfg: RunConfig) -> int:
    started = time.monotonic()
    out = _outdir()
    thetas, vals = band_samples(cfg.potential, args.bands, args.quasimomenta, args.modes)
    rows = [
        (float(thetas[t]), b, float(vals[t, b]))
        for t in range(len(thetas))
        for b in range(args.bands)
    ]
    _write_csv(out / "bands.csv", ["theta", "band", "lambda"], rows)
    _write_manifest(out, "bands", cfg, ["bands.csv"], started)
    return 0


def cmd_spectrum(args, cfg: RunConfig) -> int:
    started = time.monotonic()
    out = _outdir()
    try:
        S = diagonalize(cfg.potential, cfg.domain)
    except NotInvertible as e:
        print(
            f"spectrum: {e}\nthe construction needs 0 inside a spectral gap of -Lap+V; "
            "adjust the potential shift (try 'auto-midgap')",
            file=sys.stderr,
        )
        return 3
    _write_csv(
        out / "spectrum.csv",
        ["i", "lambda"],
        [(i, float(lam)) for i, lam in enumerate(S.eigenvalues)],
    )
    gap = {
        "j": S.j,
        "alpha": S.alpha if S.has_gap else None,
        "beta": S.beta if S.has_gap else None,
        "certified": S.has_gap,
    }
    _write_json(out / "gap.json", gap)
    _write_manifest(out, "spectrum", cfg, ["spectrum.csv", "gap.json"], started)
    return 0


def cmd_solve(args, cfg: RunConfig) -> int:
    started = time.monotonic()
    out = _outdir()
    S = diagonalize(cfg.potential, cfg.domain)
    rng = np.random.default_rng(cfg.seed)
    center = tuple(float(c) for c in cfg.ansatz["center"])
    width = float(cfg.ansatz["width"])
    amplitude = float(cfg.ansatz["amplitude"])
    last_error: Exception | None = None
    rec = None
    for attempt in range(max(1, args.tries)):
        try:
            init = initial_ansatz(center, width, amplitude, cfg.domain, S)
            rec = find_critical_point(init, S, cfg.nonlinearity, cfg.solver)
            break
        except (NoConvergence, TrivialCollapse) as e:
            last_error = e
            # jitter for the next try; same distribution the deflated search uses
            k = cfg.domain.cells
            center = tuple(rng.uniform(-k / 2, k / 2, size=cfg.domain.dim))
            width = float(rng.uniform(0.3, 0.9))
            amplitude = float(rng.uniform(4.0, 16.0) * (1 if rng.random() < 0.5 else -1))
    if rec is None:
        assert last_error is not None
        raise last_error
    _write_json(out / "solution.json", rec.to_dict())
    write_field_csv(out / "solution.csv", rec.field)
    _write_manifest(out, "solve", cfg, ["solution.json", "solution.csv"], started)
    print(
        f"J = {rec.energy:.12g}, |u|_k = {rec.norm_k:.12g}, "
        f"residual = {rec.residual:.3e}, {rec.iterations} iterations"
    )
    return 0


def cmd_reduce(args, cfg: RunConfig) -> int:
    started = time.monotonic()
    out = _outdir()
    rec, S, nl = _record_from_file(args.solution, cfg)
    kb = detect_kernel(rec, S, nl, tau=args.tau)
    cls = classify_origin(kb, grid_radius=args.radius, stencil=args.stencil)
    _write_json(
        out / "reduce.json",
        {
            "l": kb.l,
            "eta": kb.eta,
            "delta0": kb.delta0,
            "morse_index": cls.morse_index,
            "degenerate": cls.degenerate_flag,
            "reduced_hessian": [[float(v) for v in row] for row in cls.reduced_hessian],
        },
    )
    radius = args.radius if args.radius is not None else 0.5 * kb.delta0
    hs = np.linspace(-radius, radius, 2 * args.stencil + 1)
    rows = []
    for axis in range(kb.l):
        for h in hs:
            x = np.zeros(kb.l)
            x[axis] = h
            s = solve_w(kb, kernel_combination(kb, x))
            rows.append((axis, float(h), s.I, float(np.linalg.norm(s.dI))))
    _write_csv(out / "reduce.csv", ["axis", "h", "I", "dI_norm"], rows)
    _write_manifest(out, "reduce", cfg, ["reduce.json", "reduce.csv"], started)
    print(
        f"l = {kb.l}, eta = {kb.eta:.6g}, morse index {cls.morse_index}, "
        f"degenerate = {cls.degenerate_flag}"
    )
    return 0


def _target_decomposition(args, cfg: RunConfig, base_S):
    """The torus the glued problem lives on; reuse the base's when it matches."""
    cells = args.k if args.k is not None else base_S.domain.cells
    base_dom = base_S.domain
    if cells == base_dom.cells:
        return base_S
    target = TorusDomain(base_dom.dim, cells, base_dom.samples_per_cell)
    return diagonalize(base_S.potential, target)


def cmd_multibump(args, cfg: RunConfig) -> int:
    started = time.monotonic()
    out = _outdir()
    rec, base_S, nl = _record_from_file(args.base, cfg)
    kb = detect_kernel(rec, base_S, nl, tau=args.tau)
    S = _target_decomposition(args, cfg, base_S)
    centers = _parse_centers(args.centers, base_S.domain.dim)
    prob = build_problem(kb, centers, S)
    res = solve_multibump(prob, S, nl, cfg.solver)
    _write_json(
        out / "multibump.json",
        {
            "centers": [list(c) for c in centers],
            "separation": prob.l_sep,
            "residual": res.residual,
            "correction_norm": res.correction_norm,
            "reduced_coords_norm": res.reduced_coords_norm,
            "bump_energies": list(res.bump_energies),
            "drift": res.drift,
            "phase2_iters": res.phase2_iters,
            "polish_iters": res.polish_iters,
        },
    )
    write_field_csv(out / "multibump.csv", res.field)
    _write_manifest(out, "multibump", cfg, ["multibump.json", "multibump.csv"], started)
    print(
        f"{len(centers)} bumps, separation {prob.l_sep}, residual = {res.residual:.3e}, "
        f"|w| = {res.correction_norm:.3e}"
    )
    return 0


def cmd_sweep(args, cfg: RunConfig) -> int:
    started = time.monotonic()
    out = _outdir()
    rec, base_S, nl = _record_from_file(args.base, cfg)
    kb = detect_kernel(rec, base_S, nl, tau=args.tau)
    S = _target_decomposition(args, cfg, base_S)
    try:
        l_values = [int(v) for v in args.seps.split(",")]
    except ValueError as e:
        raise ConfigError(f"--seps: {e}") from e
    rows = separation_sweep(kb, args.m, l_values, S, nl, cfg.solver)
    csv_rows = []
    for row in rows:
        csv_rows.append(
            (
                row["l_sep"],
                row.get("w_norm", ""),
                row.get("x_norm", ""),
                row.get("residual", ""),
                row.get("energy_defect", ""),
                row.get("failed", ""),
            )
        )
    _write_csv(
        out / "sweep.csv",
        ["l_sep", "w_norm", "x_norm", "residual", "energy_defect", "failed"],
        csv_rows,
    )
    good = [r for r in rows if "failed" not in r]
    ws = [r["w_norm"] for r in good]
    xs = [r["x_norm"] for r in good]
    # monotonicity is only meaningful with at least two surviving rows
    summary = {
        "m": args.m,
        "l_values": l_values,
        "rows_failed": len(rows) - len(good),
        "monotone_w": all(a > b for a, b in zip(ws, ws[1:])) if len(good) >= 2 else None,
        "monotone_x": all(a > b for a, b in zip(xs, xs[1:])) if len(good) >= 2 else None,
        "rows": rows,
    }
    _write_json(out / "sweep.json", summary)
    _write_manifest(out, "sweep", cfg, ["sweep.csv", "sweep.json"], started)
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    from .verify import run_verification

    started = time.monotonic()
    out = _outdir()
    report = run_verification(seed=cfg.seed)
    (out / "report.json").write_text(report.to_json())
    _write_manifest(out, "verify", cfg, ["report.json"], started)
    for entry in report.entries:
        print(f"{'PASS' if entry.passed else 'FAIL'}  {entry.name}")
    if not report.passed:
        failed = [e.name for e in report.entries if not e.passed]
        print(f"{len(failed)} checks failed: {', '.join(failed)}", file=sys.stderr)
        return 4
    print(f"all {len(report.entries)} checks passed")
    return 0


# -- argument parsing ------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapbumps",
        description="critical points and multibump gluing for gap-indefinite energies",
    )
    parser.add_argument("--config", help="JSON config file (defaults are built in)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bands", help="Floquet band samples as CSV")
    p.add_argument("--bands", type=int, default=16)
    p.add_argument("--quasimomenta", type=int, default=48)
    p.add_argument("--modes", type=int, default=16)
    p.set_defaults(fn=cmd_bands)

    p = sub.add_parser("spectrum", help="torus eigenvalues and the gap report")
    p.add_argument("--k", type=int, help="override domain.cells")
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("solve", help="Newton search from a Gaussian ansatz")
    p.add_argument("--k", type=int, help="override domain.cells")
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--tries", type=int, default=1, help="restarts with jittered ansatz")
    p.add_argument("--ansatz-center", help="comma-separated coordinates")
    p.add_argument("--ansatz-width", type=float)
    p.add_argument("--ansatz-amplitude", type=float)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("reduce", help="kernel detection and reduced-energy profile")
    p.add_argument("--solution", required=True, help="solution record JSON or field CSV")
    p.add_argument("--tau", type=float, default=presets.TAU_FORCED,
                   help="relative Hessian threshold for the near-kernel")
    p.add_argument("--radius", type=float, help="sampling radius (default delta0/2)")
    p.add_argument("--stencil", type=int, default=3)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("multibump", help="glue translated copies of a base solution")
    p.add_argument("--base", required=True, help="solution record JSON or field CSV")
    p.add_argument("--centers", required=True, help='integer centers, e.g. "0;16" or "0,0;8,0"')
    p.add_argument("--k", type=int, help="target torus cells (default: config domain)")
    p.add_argument("--tau", type=float, default=presets.TAU_FORCED)
    p.set_defaults(fn=cmd_multibump)

    p = sub.add_parser("sweep", help="multibump gluing across separations")
    p.add_argument("--base", required=True)
    p.add_argument("--m", type=int, default=2, help="number of bumps")
    p.add_argument("--seps", default="4,8,16", help="comma-separated separations")
    p.add_argument("--k", type=int, help="target torus cells (default: config domain)")
    p.add_argument("--tau", type=float, default=presets.TAU_FORCED)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", help="run every numerical check and write the report")
    p.add_argument("--seed", type=int, help="override config seed")
    p.set_defaults(fn=cmd_verify)

    return parser


def _overrides(args) -> dict:
    """Map recognized flags onto config paths."""
    out: dict = {}
    if getattr(args, "k", None) is not None:
        out["domain.cells"] = args.k
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "ansatz_center", None) is not None:
        out["ansatz.center"] = [float(c) for c in args.ansatz_center.split(",")]
    if getattr(args, "ansatz_width", None) is not None:
        out["ansatz.width"] = args.ansatz_width
    if getattr(args, "ansatz_amplitude", None) is not None:
        out["ansatz.amplitude"] = args.ansatz_amplitude
    return out


_NUMERIC_ERRORS = (
    NotInvertible,
    NoConvergence,
    TrivialCollapse,
    AllKernel,
    OutOfBall,
    CentersCollide,
    SeparationTooSmall,
    GluingUnstable,
    np.linalg.LinAlgError,
    ValueError,
)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        return args.fn(args, cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
