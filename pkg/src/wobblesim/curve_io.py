"""CSV curve files with a JSON metadata sidecar.

Each curve is ``<name>.csv`` with header ``tau_s,acf_real,acf_imag,acf_norm,stderr``
and ``<name>.meta.json`` holding provenance, normalizer, anchor time, the
imaginary-part standard errors and the resolved run configuration.  Floats are
written with 17 significant digits, so reading a file back reproduces every
value bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .acf_analytic import AcfCurve, Provenance

HEADER = ("tau_s", "acf_real", "acf_imag", "acf_norm", "stderr")
NORMALIZATION_NOTE = "per anchor time: each curve is divided by its own maximum real part"


def fmt(x: float) -> str:
    return "%.17g" % x


def meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def write_json(path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


def write_curve(path, curve: AcfCurve, config: dict | None = None) -> Path:
    """Write ``curve`` to ``path`` plus its sidecar; returns the CSV path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    norm = curve.normalized
    se = curve.stderr
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for j, tau in enumerate(curve.taus):
            v = curve.values[j]
            w.writerow([fmt(tau), fmt(v.real), fmt(v.imag), fmt(norm[j]), "" if se is None else fmt(se[j])])
    meta = {
        "provenance": curve.provenance.value,
        "anchor_t": curve.anchor_t,
        "normalizer": curve.normalizer,
        "normalization": NORMALIZATION_NOTE,
        "stderr_imag": None if curve.stderr_imag is None else [float(x) for x in curve.stderr_imag],
        "config": config or {},
    }
    write_json(meta_path(path), meta)
    return path


def read_curve(path) -> AcfCurve:
    """Inverse of :func:`write_curve`. The ``acf_norm`` column is derived and not read."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != HEADER:
        raise ValueError(f"{path}: expected header {','.join(HEADER)}")
    body = rows[1:]
    taus = np.array([float(r[0]) for r in body])
    values = np.array([complex(float(r[1]), float(r[2])) for r in body])
    has_se = any(r[4] for r in body)
    stderr = np.array([float(r[4]) for r in body]) if has_se else None
    meta = json.loads(meta_path(path).read_text(encoding="utf-8"))
    se_im = meta.get("stderr_imag")
    return AcfCurve(
        taus=taus,
        values=values,
        normalizer=float(meta["normalizer"]),
        provenance=Provenance(meta["provenance"]),
        anchor_t=float(meta["anchor_t"]),
        stderr=stderr,
        stderr_imag=None if se_im is None else np.array(se_im, dtype=float),
    )


def write_table(path, header, rows) -> Path:
    """Plain numeric CSV (floats at 17 significant digits, other cells verbatim)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(c) if isinstance(c, (float, np.floating)) else c for c in row])
    return path
