"""Deterministic CSV / JSON / dense-matrix writers."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    """17 significant digits, '.' decimal separator."""
    return format(float(v), ".17g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(int(v)) if isinstance(v, (int, np.integer)) else fmt(v) for v in row))
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_json(path, obj) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def emit_qfield_csv(field, path) -> Path:
    """Rows x,p,q in row-major grid order (x outer, p inner)."""
    xs, ps = field.grid.xs, field.grid.ps
    rows = ((xs[i], ps[j], field.values[i, j]) for i in range(len(xs)) for j in range(len(ps)))
    return write_csv(path, ["x", "p", "q"], rows)


def emit_qfield_matrix(field, path) -> tuple[Path, Path]:
    """Dense values as .npy plus a JSON sidecar with the grid metadata."""
    path = Path(path).with_suffix(".npy")
    with open(path, "wb") as fh:
        np.save(fh, np.ascontiguousarray(field.values, dtype="<f8"), allow_pickle=False)
    g = field.grid
    meta = {
        "x_min": g.x_min, "x_max": g.x_max, "nx": g.nx,
        "p_min": g.p_min, "p_max": g.p_max, "np": g.np,
        "eta": g.eta, "layout": "values[ix, ip]", "degenerate": bool(field.degenerate),
    }
    return path, write_json(path.with_suffix(".json"), meta)


def emit_portrait_csv(cloud, path) -> Path:
    rows = ((x, p, int(s)) for x, p, s in cloud)
    return write_csv(path, ["x", "p", "seed_index"], rows)


def emit_correlation_csv(amplitudes, path) -> Path:
    """Rows m,re_C,im_C,abs2 for a complex amplitude series."""
    amps = np.asarray(amplitudes, dtype=complex)
    rows = ((m, a.real, a.imag, abs(a) ** 2) for m, a in enumerate(amps))
    return write_csv(path, ["m", "re_C", "im_C", "abs2"], rows)


def state_to_json(psi, meta=None) -> dict:
    psi = np.asarray(psi, dtype=complex)
    return {
        "n_max": len(psi) - 1,
        "amps": [[float(a.real), float(a.imag)] for a in psi],
        "meta": meta or {},
    }


def emit_state_json(psi, path, meta=None) -> Path:
    return write_json(path, state_to_json(psi, meta))


def load_state_json(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    amps = np.array(obj["amps"], dtype=float)
    if amps.shape != (obj["n_max"] + 1, 2):
        raise ValueError("amps length does not match n_max")
    return amps[:, 0] + 1j * amps[:, 1]


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
