"""Experiment runner: every analysis as a subcommand with reproducible
key=value configs, CSV/JSON results and a checksummed run manifest.

Precedence: command-line flags override config-file entries, which override
defaults. Identical resolved config (including seed) gives byte-identical
result files. Exit codes: 0 success, 2 argument/config errors, 3 computation
errors (recorded in the manifest).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from . import analytic, diagnostics, duality, eigensolver, serialize, transfer
from .errors import NHLabError
from .model import Boundary, Kind, ModelSpec, build_model, densify, fibonacci_approximant

_ENV_OUTDIR = "NHLAB_OUTPUT_DIR"


def _parse_complex(s: str) -> complex:
    return complex(s.replace(" ", ""))


def _model_args(sub):
    sub.add_argument("--kind", choices=[k.value for k in Kind])
    sub.add_argument("-V", "--potential", dest="V", type=float)
    sub.add_argument("-m", "--fib-index", dest="m", type=int,
                     help="Fibonacci index: p/q = F_{m-1}/F_m, L = F_m")
    sub.add_argument("-p", type=int)
    sub.add_argument("-q", type=int)
    sub.add_argument("--theta", type=float)
    sub.add_argument("--h-field", dest="h", type=float)
    sub.add_argument("-L", type=int)
    sub.add_argument("--boundary", choices=[b.value for b in Boundary])
    sub.add_argument("--seed", type=int)


def _common_args(sub):
    sub.add_argument("--config", help="key=value config file; flags win")
    sub.add_argument("--output-dir")
    sub.add_argument("--format", choices=["csv", "json"])


def _read_config(path: str) -> Dict[str, str]:
    kv: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{i}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
    return kv


def _resolve(args, key: str, cast, default=None):
    val = getattr(args, key, None)
    if val is not None:
        return val
    cfg = getattr(args, "_config", {})
    if key in cfg:
        return cast(cfg[key])
    return default


def _resolve_model(args) -> ModelSpec:
    kind = Kind(_resolve(args, "kind", str, "exp"))
    V = _resolve(args, "V", float, 1.0)
    m = _resolve(args, "m", int)
    p = _resolve(args, "p", int)
    q = _resolve(args, "q", int)
    if m is not None:
        p, q = fibonacci_approximant(m)
    elif p is None or q is None:
        p, q = fibonacci_approximant(13)
    theta = _resolve(args, "theta", float, 0.5)
    h = _resolve(args, "h", float, 0.0)
    boundary = Boundary(_resolve(args, "boundary", str, "periodic"))
    L = _resolve(args, "L", int)
    if L is None:
        L = q if kind in (Kind.EXP, Kind.TAN) else 233
    seed = _resolve(args, "seed", int, 0)
    return ModelSpec(kind=kind, V=V, p=p, q=q, theta=theta, h=h, L=L,
                     boundary=boundary, seed=seed)


def _energy_list(args) -> List[complex]:
    es = getattr(args, "E", None)
    if es:
        return [_parse_complex(e) for e in es]
    cfg = getattr(args, "_config", {})
    if "E" in cfg:
        return [_parse_complex(e) for e in cfg["E"].split(";")]
    grid = _resolve(args, "e_grid", str)
    if grid:
        start, stop, num = grid.split(":")
        return [complex(x) for x in np.linspace(float(start), float(stop), int(num))]
    raise ValueError("no energies given (use -E or --e-grid)")


class _Run:
    """Collects output files and writes the checksummed manifest last."""

    def __init__(self, command: str, outdir: str, config: Dict):
        self.command = command
        self.outdir = outdir
        self.config = config
        self.files: List[str] = []
        self.t0 = time.monotonic()
        os.makedirs(outdir, exist_ok=True)

    def emit(self, name: str, text: str):
        path = os.path.join(self.outdir, name)
        serialize.write_text_atomic(path, text)
        self.files.append(name)

    def finish(self, status: str, error: Optional[Dict] = None) -> int:
        manifest = {
            "command": self.command,
            "version": __version__,
            "config": self.config,
            "wall_clock_s": round(time.monotonic() - self.t0, 3),
            "files": [
                {"name": n,
                 "sha256": serialize.sha256_hex(os.path.join(self.outdir, n)),
                 "bytes": os.path.getsize(os.path.join(self.outdir, n))}
                for n in self.files
            ],
            "status": status,
        }
        if error:
            manifest["error"] = error
        serialize.write_text_atomic(os.path.join(self.outdir, "manifest.json"),
                                    json.dumps(manifest, sort_keys=True, indent=1) + "\n")
        return 0 if status == "ok" else 3


def _spectrum_files(run: _Run, spectrum, fmt: str, stem: str = "eigenvalues"):
    if fmt == "json":
        run.emit(f"{stem}.json", serialize.spectrum_to_json(spectrum))
    else:
        run.emit(f"{stem}.csv", serialize.spectrum_to_csv(spectrum))


def _cmd_spectrum(args, run: _Run) -> None:
    spec = _resolve_model(args)
    fmt = _resolve(args, "format", str, "csv")
    M = densify(build_model(spec))
    want_vectors = bool(_resolve(args, "vectors", lambda s: s == "true", False))
    sp = eigensolver.eigenpairs(M) if want_vectors else eigensolver.eigenvalues(M)
    _spectrum_files(run, sp, fmt)
    targets = getattr(args, "state_near", None) or []
    cfg = getattr(args, "_config", {})
    if not targets and "state_near" in cfg:
        targets = cfg["state_near"].split(";")
    if targets:
        want_dual = bool(_resolve(args, "dual_state", lambda s: s == "true", False))
        values = sp.values
        idx = [int(np.argmin(np.abs(values - _parse_complex(t)))) for t in targets]
        pairs = eigensolver.eigenpairs(M, select=idx)
        for col, j in enumerate(idx):
            v = pairs.vectors[:, col]
            lines = [f"# state near E={targets[col]}, eigenvalue=({serialize.fmt(values[j].real)},{serialize.fmt(values[j].imag)})",
                     "k,re,im"]
            for site in range(spec.L):
                lines.append(f"{site + 1},{serialize.fmt(v[site].real)},{serialize.fmt(v[site].imag)}")
            run.emit(f"state_{col}.csv", "\n".join(lines) + "\n")
            if want_dual and spec.kind in (Kind.EXP, Kind.TAN) and spec.L == spec.q:
                dual = duality.fourier_transform(v, spec.p, spec.q).amplitudes
                lines = [f"# dual of state near E={targets[col]}", "k,re,im"]
                for site in range(spec.L):
                    lines.append(f"{site + 1},{serialize.fmt(dual[site].real)},{serialize.fmt(dual[site].imag)}")
                run.emit(f"dual_state_{col}.csv", "\n".join(lines) + "\n")


def _cmd_lyapunov(args, run: _Run) -> None:
    spec = _resolve_model(args)
    route = _resolve(args, "route", str, "transfer")
    energies = _energy_list(args)
    n_steps = _resolve(args, "N", int, 10 ** 6)
    K = _resolve(args, "K", int, 10 ** 5)
    vartheta = _resolve(args, "vartheta", float, 0.0)
    n_theta = _resolve(args, "n_theta", int, 8)
    qpts = _resolve(args, "quadrature_points", int, 10 ** 4)
    records = []
    for E in energies:
        if route == "transfer":
            est = transfer.lyapunov_position(spec, E, n_steps, vartheta, n_theta)
        elif route == "momentum":
            est = duality.lyapunov_momentum_product(spec, E, K)
        elif route == "momentum-tan":
            est = duality.lyapunov_momentum_tan(E, spec.V, qpts)
        else:
            raise ValueError(f"unknown route {route!r}")
        records.append({"E": [E.real, E.imag], "gamma": est.gamma,
                        "stderr": est.stderr, "method": est.method.value,
                        "n_steps": est.n_steps, "vartheta": est.vartheta})
    unique_re = len(set(e.real for e in energies)) == len(energies)
    xs = [e.real if unique_re else i for i, e in enumerate(energies)]
    run.emit("lyapunov.csv", serialize.scan_to_csv(
        xs, [r["gamma"] for r in records], [r["stderr"] for r in records]))
    run.emit("lyapunov.json", json.dumps(records, sort_keys=True, indent=1) + "\n")


def _cmd_avila_scan(args, run: _Run) -> None:
    spec = _resolve_model(args)
    energies = _energy_list(args)
    vmax = _resolve(args, "vartheta_max", float, 1.5)
    nv = _resolve(args, "n_vartheta", int, 13)
    n_steps = _resolve(args, "N", int, 10 ** 5)
    grid = np.linspace(0.0, vmax, nv)
    scan = transfer.avila_scan(spec, energies[0], grid, n_steps)
    run.emit("avila.csv", serialize.scan_to_csv(scan.varthetas, scan.gammas, scan.stderrs))
    run.emit("avila.json", json.dumps({
        "slopes": scan.slopes, "intercepts": scan.intercepts,
        "breakpoints": scan.breakpoints, "non_convex": scan.non_convex,
        "fit_residual": scan.fit_residual}, sort_keys=True, indent=1) + "\n")


def _cmd_duality_check(args, run: _Run) -> None:
    spec = _resolve_model(args)
    tol = _resolve(args, "tol", float, 1e-8)
    wpos = eigensolver.eigenvalues(densify(build_model(spec)))
    wdual = eigensolver.eigenvalues(densify(duality.build_dual_exp(spec)))
    scaled = eigensolver.Spectrum(values=spec.V * wdual.values)
    hd = diagnostics.spectral_distance(wpos, scaled)
    _spectrum_files(run, wpos, "csv", stem="position")
    _spectrum_files(run, scaled, "csv", stem="dual_scaled")
    run.emit("duality.json", json.dumps({
        "hausdorff": hd, "tol": tol, "pass": bool(hd <= tol)},
        sort_keys=True, indent=1) + "\n")


def _cmd_dini(args, run: _Run) -> None:
    energies = _energy_list(args)
    qpts = _resolve(args, "quadrature_points", int, 0)
    rows = []
    for E in energies:
        row = {"E": [E.real, E.imag], "value": analytic.dini_integral(E)}
        if qpts:
            u = (np.arange(qpts) + 0.5) * (2.0 * math.pi / qpts)
            row["quadrature"] = float(np.log(np.abs(E - 2.0 * np.cos(u))).mean())
        rows.append(row)
    run.emit("dini.json", json.dumps(rows, sort_keys=True, indent=1) + "\n")
    if len(rows) == 1:
        print(serialize.fmt(rows[0]["value"]))


def _cmd_thouless(args, run: _Run) -> None:
    path = _resolve(args, "spectrum_file", str)
    if not path:
        raise ValueError("--spectrum-file is required")
    values = serialize.load_points(path)
    rows = []
    for E in _energy_list(args):
        rows.append({"E": [E.real, E.imag],
                     "gamma": analytic.thouless_gamma(values, E)})
    run.emit("thouless.json", json.dumps(rows, sort_keys=True, indent=1) + "\n")


def _cmd_dynamics(args, run: _Run) -> None:
    spec = _resolve_model(args)
    t_max = _resolve(args, "t_max", float, 40.0)
    n_t = _resolve(args, "n_t", int, 161)
    initial = _resolve(args, "initial", str, "uniform")
    M = densify(build_model(spec))
    psi0 = np.zeros(spec.L, dtype=complex)
    if initial == "uniform":
        psi0[:] = 1.0 / math.sqrt(spec.L)
    elif initial == "delta":
        psi0[spec.L // 2] = 1.0
    else:
        raise ValueError("initial must be 'uniform' or 'delta'")
    result = diagnostics.evolve_norm(M, psi0, np.linspace(0.0, t_max, n_t))
    run.emit("dynamics.csv", serialize.dynamics_to_csv(result.t, result.norms))
    run.emit("dynamics.json", json.dumps({
        "growth_exponent": result.growth_exponent,
        "max_imag": result.max_imag,
        "basis_condition": result.basis_condition,
        "initial": initial}, sort_keys=True, indent=1) + "\n")


def _tan_distance(values: np.ndarray, V: float) -> np.ndarray:
    """Distance to the conjectured set: real segment [V-2, 2-V] union the
    imaginary axis (axis only for V > 2)."""
    d_axis = np.abs(values.real)
    if V > 2.0:
        return d_axis
    clipped = np.clip(values.real, V - 2.0, 2.0 - V)
    d_seg = np.abs(values - clipped)
    return np.minimum(d_seg, d_axis)


def _cmd_tan_check(args, run: _Run) -> None:
    spec = _resolve_model(args)
    if spec.kind is not Kind.TAN:
        spec = spec.with_(kind=Kind.TAN)
    tol = _resolve(args, "distance_tol", float, 5e-2)
    n_steps = _resolve(args, "N", int, 10 ** 5)
    sp = eigensolver.eigenvalues(densify(build_model(spec)))
    dist = _tan_distance(sp.values, spec.V)
    frac = float((dist <= tol).mean())
    try:
        probes = _energy_list(args)
    except ValueError:
        probes = []
    if not probes:
        probes = [0j, 0.5 * (2 - spec.V) + 0j, -0.5 * (2 - spec.V) + 0j, 0.8j] \
            if spec.V <= 2 else [0.8j, -0.8j]
    probe_rows = []
    for E in probes:
        closed = analytic.gamma_tan_closed(E, spec.V)
        measured = transfer.lyapunov_position(spec, E, n_steps).gamma
        momentum = duality.lyapunov_momentum_tan(E, spec.V).gamma
        probe_rows.append({"E": [E.real, E.imag], "gamma_closed": closed,
                           "gamma_transfer": measured,
                           "gamma_momentum_quadrature": momentum,
                           "diff": abs(closed - measured)})
    _spectrum_files(run, sp, "csv")
    curve = analytic.analytic_spectrum_tan(spec.V, 512)
    run.emit("conjecture_curve.csv", serialize.curve_to_csv(curve))
    run.emit("tan_check.json", json.dumps({
        "conjecture": True,
        "fraction_within": frac,
        "distance_tol": tol,
        "max_distance": float(dist.max()),
        "probes": probe_rows}, sort_keys=True, indent=1) + "\n")


def _cmd_hatano_scan(args, run: _Run) -> None:
    spec = _resolve_model(args)
    if spec.kind is not Kind.HATANO:
        spec = spec.with_(kind=Kind.HATANO)
    h_max = _resolve(args, "h_max", float, 1.0)
    h_step = _resolve(args, "h_step", float, 0.05)
    n_seeds = _resolve(args, "n_seeds", int, 8)
    grid = np.round(np.arange(0.0, h_max + 0.5 * h_step, h_step), 12)
    report = diagnostics.hatano_regime_scan(spec, grid, n_seeds)
    run.emit("regime.csv", serialize.regime_to_csv(report))
    run.emit("regime.json", serialize.regime_summary_json(report))


def _cmd_report(args, run: _Run) -> None:
    fa = _resolve(args, "file_a", str)
    fb = _resolve(args, "file_b", str)
    if not fa or not fb:
        raise ValueError("--file-a and --file-b are required")
    with open(fa, "r", encoding="utf-8") as fh:
        schema_a = serialize.detect_schema(fh.read())
    with open(fb, "r", encoding="utf-8") as fh:
        schema_b = serialize.detect_schema(fh.read())
    a = serialize.load_points(fa)
    b = serialize.load_points(fb)
    tol_distance = _resolve(args, "tol_distance", float, 1e-3)
    tol_real = _resolve(args, "tol_real", float, 1e-6)
    d_ab = diagnostics.directed_distance(a, b)
    d_ba = diagnostics.directed_distance(b, a)
    # against a sampled curve only the spectrum->curve direction is meaningful
    # (the curve is sampled much more densely than the eigenvalue spacing)
    decisive = d_ab if schema_b == "curve" else max(d_ab, d_ba)
    checks = {"distance": bool(decisive <= tol_distance)}
    payload = {
        "file_a": fa, "file_b": fb,
        "schema_a": schema_a, "schema_b": schema_b,
        "distance_a_to_b": d_ab, "distance_b_to_a": d_ba,
        "distance_symmetric": max(d_ab, d_ba),
        "distance_decisive": decisive,
        "tol_distance": tol_distance,
        "real_fraction_a": diagnostics.real_fraction(a, tol_real),
        "real_fraction_b": diagnostics.real_fraction(b, tol_real),
        "tol_real": tol_real,
    }
    gp = _resolve(args, "gamma_position", str)
    gm = _resolve(args, "gamma_momentum", str)
    V = _resolve(args, "V", float)
    if gp and gm and V:
        with open(gp, "r", encoding="utf-8") as fh:
            _, gpos, _ = serialize.scan_from_csv(fh.read())
        with open(gm, "r", encoding="utf-8") as fh:
            _, gmom, _ = serialize.scan_from_csv(fh.read())
        resid = [analytic.duality_relation_residual(x, y, V)
                 for x, y in zip(gpos, gmom)]
        payload["duality_residuals"] = resid
        tol_eq = _resolve(args, "tol_duality", float, 2e-2)
        checks["duality"] = bool(max(abs(r) for r in resid) <= tol_eq)
    payload["checks"] = checks
    payload["pass"] = all(checks.values())
    run.emit("report.json", json.dumps(payload, sort_keys=True, indent=1) + "\n")
    print("PASS" if payload["pass"] else "FAIL")


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "lyapunov": _cmd_lyapunov,
    "avila-scan": _cmd_avila_scan,
    "duality-check": _cmd_duality_check,
    "dini": _cmd_dini,
    "thouless": _cmd_thouless,
    "dynamics": _cmd_dynamics,
    "tan-check": _cmd_tan_check,
    "hatano-scan": _cmd_hatano_scan,
    "report": _cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhlab",
        description="Spectra and Lyapunov exponents of non-Hermitian 1D lattice models")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("spectrum", help="diagonalize a model instance")
    _model_args(sp)
    sp.add_argument("--vectors", action="store_const", const=True, default=None,
                    help="also compute eigenvectors/residuals")
    sp.add_argument("--state-near", action="append",
                    help="dump the eigenstate nearest this energy (repeatable)")
    sp.add_argument("--dual-state", action="store_const", const=True, default=None,
                    help="also dump the momentum-space dual of dumped states")
    _common_args(sp)

    ly = subs.add_parser("lyapunov", help="Lyapunov exponent estimates")
    _model_args(ly)
    ly.add_argument("--route", choices=["transfer", "momentum", "momentum-tan"])
    ly.add_argument("-E", action="append", help="complex energy, repeatable")
    ly.add_argument("--e-grid", dest="e_grid", help="start:stop:num real grid")
    ly.add_argument("-N", type=int, help="transfer product length")
    ly.add_argument("-K", type=int, help="momentum product length")
    ly.add_argument("--vartheta", type=float)
    ly.add_argument("--n-theta", dest="n_theta", type=int)
    ly.add_argument("--quadrature-points", dest="quadrature_points", type=int)
    _common_args(ly)

    av = subs.add_parser("avila-scan", help="gamma(vartheta) with integer slopes")
    _model_args(av)
    av.add_argument("-E", action="append", required=False)
    av.add_argument("--vartheta-max", dest="vartheta_max", type=float)
    av.add_argument("--n-vartheta", dest="n_vartheta", type=int)
    av.add_argument("-N", type=int)
    _common_args(av)

    du = subs.add_parser("duality-check", help="position vs scaled dual spectrum")
    _model_args(du)
    du.add_argument("--tol", type=float)
    _common_args(du)

    dn = subs.add_parser("dini", help="closed-form log-band integral")
    dn.add_argument("-E", action="append")
    dn.add_argument("--e-grid", dest="e_grid")
    dn.add_argument("--quadrature-points", dest="quadrature_points", type=int)
    _common_args(dn)

    th = subs.add_parser("thouless", help="log-distance average over a spectrum file")
    th.add_argument("--spectrum-file", dest="spectrum_file")
    th.add_argument("-E", action="append")
    th.add_argument("--e-grid", dest="e_grid")
    _common_args(th)

    dy = subs.add_parser("dynamics", help="eigenbasis norm evolution")
    _model_args(dy)
    dy.add_argument("--t-max", dest="t_max", type=float)
    dy.add_argument("--n-t", dest="n_t", type=int)
    dy.add_argument("--initial", choices=["uniform", "delta"])
    _common_args(dy)

    tc = subs.add_parser("tan-check", help="tangent-model conjecture check")
    _model_args(tc)
    tc.add_argument("-E", action="append")
    tc.add_argument("--distance-tol", dest="distance_tol", type=float)
    tc.add_argument("-N", type=int)
    _common_args(tc)

    hs = subs.add_parser("hatano-scan", help="real-fraction regime scan")
    _model_args(hs)
    hs.add_argument("--h-max", dest="h_max", type=float)
    hs.add_argument("--h-step", dest="h_step", type=float)
    hs.add_argument("--n-seeds", dest="n_seeds", type=int)
    _common_args(hs)

    rp = subs.add_parser("report", help="compare result files")
    rp.add_argument("--file-a", dest="file_a")
    rp.add_argument("--file-b", dest="file_b")
    rp.add_argument("--tol-distance", dest="tol_distance", type=float)
    rp.add_argument("--tol-real", dest="tol_real", type=float)
    rp.add_argument("--gamma-position", dest="gamma_position")
    rp.add_argument("--gamma-momentum", dest="gamma_momentum")
    rp.add_argument("--tol-duality", dest="tol_duality", type=float)
    rp.add_argument("-V", dest="V", type=float)
    _common_args(rp)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _read_config(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    args._config = config
    outdir = args.output_dir or config.get("output_dir") \
        or os.environ.get(_ENV_OUTDIR) or os.path.join(os.getcwd(), "nhlab-out")
    resolved = dict(config)
    for key, val in vars(args).items():
        if key.startswith("_") or key in ("config", "output_dir") or val is None:
            continue
        resolved[key] = val if isinstance(val, (int, float, bool, str)) else str(val)
    run = _Run(args.command, outdir, resolved)
    try:
        _COMMANDS[args.command](args, run)
    except (NHLabError, ValueError, OSError) as exc:
        code = run.finish("error", {"type": type(exc).__name__, "message": str(exc)})
        print(f"error: {exc}", file=sys.stderr)
        return code
    return run.finish("ok")


if __name__ == "__main__":
    sys.exit(main())
