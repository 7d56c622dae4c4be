"""CSV/JSON result files with fixed schemas, atomic writes and checksums.

Schemas (one column-header line, fixed order, shortest round-trip floats so
identical runs are byte-identical):
  eigenvalues  re,im,residual      (residual empty when not computed)
  curves       k,re,im             (preceded by one "# kind=..,V=..,conjecture=.." line)
  scans        x,gamma,stderr
  regime       h,seed,real_fraction
  dynamics     t,norm
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Optional

import numpy as np

from .analytic import AnalyticCurve, CurveKind
from .diagnostics import RegimeReport
from .eigensolver import Spectrum
from .errors import SchemaMismatch


def fmt(x) -> str:
    return repr(float(x))


def spectrum_to_csv(spectrum: Spectrum) -> str:
    lines = ["re,im,residual"]
    res = spectrum.residuals
    if res is not None and spectrum.vector_indices is not None and \
            len(spectrum.vector_indices) != len(spectrum.values):
        res = None  # partial vector sets do not align with the value list
    for i, v in enumerate(spectrum.values):
        r = fmt(res[i]) if res is not None else ""
        lines.append(f"{fmt(v.real)},{fmt(v.imag)},{r}")
    return "\n".join(lines) + "\n"


def spectrum_from_csv(text: str) -> Spectrum:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines or lines[0] != "re,im,residual":
        raise SchemaMismatch("expected eigenvalue CSV header 're,im,residual'")
    vals, res, any_res = [], [], False
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise SchemaMismatch(f"bad eigenvalue row: {ln!r}")
        vals.append(complex(float(parts[0]), float(parts[1])))
        if parts[2] != "":
            res.append(float(parts[2]))
            any_res = True
        else:
            res.append(np.nan)
    return Spectrum(values=np.array(vals, dtype=complex),
                    residuals=np.array(res) if any_res else None)


def spectrum_to_json(spectrum: Spectrum) -> str:
    payload = {
        "values": [[float(v.real), float(v.imag)] for v in spectrum.values],
        "residuals": (None if spectrum.residuals is None
                      else [float(r) for r in spectrum.residuals]),
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def curve_to_csv(curve: AnalyticCurve) -> str:
    flag = "true" if curve.conjecture else "false"
    lines = [f"# kind={curve.kind.value},V={fmt(curve.V)},conjecture={flag}",
             "k,re,im"]
    for k, s in zip(curve.k, curve.samples):
        lines.append(f"{fmt(k)},{fmt(s.real)},{fmt(s.imag)}")
    return "\n".join(lines) + "\n"


def curve_from_csv(text: str) -> AnalyticCurve:
    meta = {"kind": CurveKind.LOOP, "V": 0.0, "conjecture": False}
    lines = text.splitlines()
    body = []
    for ln in lines:
        if ln.startswith("#"):
            for item in ln[1:].strip().split(","):
                key, _, val = item.partition("=")
                if key == "kind":
                    meta["kind"] = CurveKind(val)
                elif key == "V":
                    meta["V"] = float(val)
                elif key == "conjecture":
                    meta["conjecture"] = val == "true"
        elif ln:
            body.append(ln)
    if not body or body[0] != "k,re,im":
        raise SchemaMismatch("expected curve CSV header 'k,re,im'")
    k, samples = [], []
    for ln in body[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise SchemaMismatch(f"bad curve row: {ln!r}")
        k.append(float(parts[0]))
        samples.append(complex(float(parts[1]), float(parts[2])))
    return AnalyticCurve(meta["kind"], meta["V"], np.array(k),
                         np.array(samples, dtype=complex), meta["conjecture"])


def scan_to_csv(x, gamma, stderr) -> str:
    lines = ["x,gamma,stderr"]
    for xi, gi, si in zip(x, gamma, stderr):
        lines.append(f"{fmt(xi)},{fmt(gi)},{fmt(si)}")
    return "\n".join(lines) + "\n"


def scan_from_csv(text: str):
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines or lines[0] != "x,gamma,stderr":
        raise SchemaMismatch("expected scan CSV header 'x,gamma,stderr'")
    rows = [tuple(float(p) for p in ln.split(",")) for ln in lines[1:]]
    arr = np.array(rows) if rows else np.empty((0, 3))
    return arr[:, 0], arr[:, 1], arr[:, 2]


def regime_to_csv(report: RegimeReport) -> str:
    lines = ["h,seed,real_fraction"]
    for hi, h in enumerate(report.h_grid):
        for si, seed in enumerate(report.seeds):
            lines.append(f"{fmt(h)},{seed},{fmt(report.fractions[hi, si])}")
    return "\n".join(lines) + "\n"


def regime_summary_json(report: RegimeReport) -> str:
    payload = {
        "h1_est": report.h1_est,
        "h2_est": report.h2_est,
        "n_seeds": report.n_seeds,
        "h_grid": [float(h) for h in report.h_grid],
        "errors": [list(e) for e in report.errors],
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def dynamics_to_csv(t, norms) -> str:
    lines = ["t,norm"]
    for ti, ni in zip(t, norms):
        lines.append(f"{fmt(ti)},{fmt(ni)}")
    return "\n".join(lines) + "\n"


def detect_schema(text: str) -> str:
    for ln in text.splitlines():
        if ln.startswith("#") or not ln:
            continue
        if ln == "re,im,residual":
            return "eigenvalues"
        if ln == "k,re,im":
            return "curve"
        if ln == "x,gamma,stderr":
            return "scan"
        if ln == "h,seed,real_fraction":
            return "regime"
        if ln == "t,norm":
            return "dynamics"
        raise SchemaMismatch(f"unrecognized header {ln!r}")
    raise SchemaMismatch("empty file")


def load_points(path: str) -> np.ndarray:
    """Complex point set from an eigenvalue or curve CSV."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    schema = detect_schema(text)
    if schema == "eigenvalues":
        return spectrum_from_csv(text).values
    if schema == "curve":
        return curve_from_csv(text).samples
    raise SchemaMismatch(f"{path}: schema {schema!r} has no point-set reading")


def write_text_atomic(path: str, text: str):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def sha256_hex(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
