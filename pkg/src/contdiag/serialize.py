"""Deterministic CSV/JSON output and sample-file input."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

import numpy as np

from .errors import ConfigError
from .tracks import HermitianField

TRACK_COLUMNS = ("t", "ReU11", "ImU11", "ReU12", "ImU12", "ReU21", "ImU21", "ReU22", "ImU22",
                 "d1", "d2", "offdiag_resid", "unitarity_defect")
INPUT_COLUMNS = ("t", "f", "g", "h_re", "h_im")


def fmt(x) -> str:
    """17 significant digits: round-trip exact for doubles."""
    return "%.17g" % float(x)


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def track_rows(track):
    U = track.U
    cols = [track.t]
    for i in range(2):
        for j in range(2):
            cols += [U[:, i, j].real, U[:, i, j].imag]
    cols += [track.diag[:, 0].real, track.diag[:, 1].real, track.offdiag, track.unitarity_defect]
    return np.stack(cols, axis=-1)


def track_csv(track) -> str:
    return csv_text(TRACK_COLUMNS, track_rows(track))


def jsonable(obj):
    """Plain-JSON view: numpy scalars unwrapped, non-finite floats spelled out."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def json_text(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def read_samples(path) -> HermitianField:
    """Field from a CSV file with header ``t,f,g,h_re,h_im``."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != INPUT_COLUMNS:
                raise ConfigError(f"{path}: expected header {','.join(INPUT_COLUMNS)}")
            rows = [r for r in reader if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != 5 or data.shape[0] < 2:
        raise ConfigError(f"{path}: need at least two rows of five columns")
    if not np.all(np.isfinite(data)):
        raise ConfigError(f"{path}: non-finite entry")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise ConfigError(f"{path}: t must be strictly increasing")
    return HermitianField.from_arrays(*data.T)
