"""Master-curve files, synthetic curves and JSON (de)serialisation.

File formats
------------
Curve CSV
    Header ``omega_shifted,e_storage,e_loss`` followed by one row per shifted
    frequency (rad/s, MPa, MPa), ascending in frequency.
Parameter JSON
    ``{"kind": "FMM-FMG", "branch1": {"E_c": .., "tau_c": .., "alpha": .., "beta": ..},
    "branch2": {...}, "tau2_constrained": true}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DataError, EmptyDataError, OrderError, ParseError
from .viscomodel import BranchParams, FractionalModel, ModelKind, model_moduli
from ._validation import as_frequency_grid

CURVE_HEADER = ("omega_shifted", "e_storage", "e_loss")


@dataclass(frozen=True)
class MasterCurve:
    """Storage and loss moduli sampled on a shifted-frequency grid."""

    x: np.ndarray
    e_storage: np.ndarray
    e_loss: np.ndarray
    label: str = field(default="")

    def __post_init__(self):
        arrays = []
        for name in ("x", "e_storage", "e_loss"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise DataError(f"{name} must be one-dimensional")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrays.append(a)
        n = {a.size for a in arrays}
        if len(n) != 1:
            raise DataError("x, e_storage and e_loss must have equal lengths")
        if arrays[0].size < 2:
            raise EmptyDataError("a master curve needs at least 2 points")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise DataError("master-curve values must be finite")
        if np.any(self.x <= 0) or np.any(self.e_storage <= 0) or np.any(self.e_loss <= 0):
            raise DataError("frequencies and moduli must be > 0")
        if np.any(np.diff(self.x) <= 0):
            raise OrderError("shifted frequencies must be strictly ascending")

    def __len__(self) -> int:
        return self.x.size

    @property
    def n_points(self) -> int:
        return self.x.size

    @property
    def decades(self) -> float:
        return float(np.log10(self.x[-1] / self.x[0]))

    def __eq__(self, other):
        if not isinstance(other, MasterCurve):
            return NotImplemented
        return (self.label == other.label and np.array_equal(self.x, other.x)
                and np.array_equal(self.e_storage, other.e_storage)
                and np.array_equal(self.e_loss, other.e_loss))

    __hash__ = None


# --- CSV --------------------------------------------------------------------

def load_master_curve(source, label: str = "") -> MasterCurve:
    """Parse a curve CSV from a path, a text/bytes stream or a string of CSV text.

    Rows are validated but never re-sorted.
    """
    if isinstance(source, (str, os.PathLike)) and not (isinstance(source, str) and "\n" in source):
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        label = label or path.stem
    elif isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw

    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise EmptyDataError("empty curve file")
    header = tuple(c.strip() for c in rows[0])
    if header != CURVE_HEADER:
        raise ParseError(f"expected header {','.join(CURVE_HEADER)}, got {','.join(header)}")
    body = rows[1:]
    if len(body) < 2:
        raise EmptyDataError(f"curve needs at least 2 rows, got {len(body)}")
    values = np.empty((len(body), 3))
    for i, row in enumerate(body, start=2):
        if len(row) != 3:
            raise ParseError(f"line {i}: expected 3 columns, got {len(row)}")
        try:
            values[i - 2] = [float(c) for c in row]
        except ValueError as exc:
            raise ParseError(f"line {i}: {exc}") from None
    return MasterCurve(values[:, 0], values[:, 1], values[:, 2], label=label)


def format_curve_csv(curve: MasterCurve) -> str:
    out = io.StringIO()
    out.write(",".join(CURVE_HEADER) + "\n")
    for row in zip(curve.x, curve.e_storage, curve.e_loss):
        out.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return out.getvalue()


def save_master_curve(curve: MasterCurve, path) -> None:
    write_atomic(path, format_curve_csv(curve))


# --- synthetic curves -------------------------------------------------------

def synthesize_curve(m: FractionalModel, grid, noise_sigma_log10: float = 0.0,
                     seed=None, label: str = "synthetic") -> MasterCurve:
    """Evaluate ``m`` on ``grid`` with optional multiplicative log-normal noise.

    Each modulus sample is multiplied by ``10**eps`` with ``eps ~ N(0, sigma)``,
    drawn independently per point and channel.
    """
    if not noise_sigma_log10 >= 0:
        raise DataError("noise_sigma_log10 must be >= 0")
    g = as_frequency_grid(grid, min_points=2)
    e1, e2 = model_moduli(m, g)
    if noise_sigma_log10 > 0:
        rng = np.random.default_rng(seed)
        eps = rng.normal(0.0, noise_sigma_log10, size=(2, g.size))
        e1 = e1 * 10.0 ** eps[0]
        e2 = e2 * 10.0 ** eps[1]
    return MasterCurve(g, e1, e2, label=label)


# --- JSON -------------------------------------------------------------------

def model_to_dict(m: FractionalModel) -> dict:
    def br(b: BranchParams):
        return {"E_c": b.E_c, "tau_c": b.tau_c, "alpha": b.alpha, "beta": b.beta}
    return {"kind": m.kind.value, "branch1": br(m.branch1), "branch2": br(m.branch2),
            "tau2_constrained": m.tau2_constrained}


def model_from_dict(d: dict) -> FractionalModel:
    """Inverse of :func:`model_to_dict`.

    With ``tau2_constrained`` true, a missing ``branch2.tau_c`` is filled from
    the constraint; a supplied one must satisfy it.
    """
    try:
        kind = ModelKind.parse(d.get("kind", ModelKind.FMM_FMG.value))
        b1 = d["branch1"]
        b2 = dict(d["branch2"])
        constrained = bool(d.get("tau2_constrained", False))
        if constrained and "tau_c" not in b2:
            return FractionalModel.constrained(
                float(b1["E_c"]), float(b1["tau_c"]), float(b1["alpha"]),
                float(b1.get("beta", 0.0)), float(b2["E_c"]), float(b2["alpha"]), kind=kind)
        return FractionalModel(
            BranchParams(float(b1["E_c"]), float(b1["tau_c"]), float(b1["alpha"]),
                         float(b1.get("beta", 0.0))),
            BranchParams(float(b2["E_c"]), float(b2["tau_c"]), float(b2["alpha"]),
                         float(b2.get("beta", 0.0))),
            kind=kind, tau2_constrained=constrained)
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed parameter JSON: missing or invalid {exc}") from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats, NaN/inf as null)."""
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def save_json(obj, path) -> None:
    write_atomic(path, dumps(obj))


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
