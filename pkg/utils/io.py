from __future__ import annotations

import io
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.diagnostics import CSV_COLUMNS, DiagnosticsRecord, series_frame
from utils.errors import SnapshotError
from utils.field import BCTag, FlowState, Regime, Rep, ScalarField, to_physical, velocity_from_state
from utils.grid import Grid, build_grid

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SNAPSHOT_FIELDS = ("psi", "omega", "mean_u", "u", "v")
_DTYPE = np.dtype("<f8")
_FORMAT = {"byte_order": "little", "scalar": "float64", "layout": "y-major row-major"}
_HEADER_KEYS = ("schema_version", "nx", "ny", "stretch", "t", "nu1", "nu2", "regime", "field_names", *_FORMAT)
CROSS_CHECK_TOL = 1e-12

SUMMARY_NAME = "study_summary.json"


# ----------------------------
# Field files (JSON header line + little-endian float64 payload)
# ----------------------------

def _header_bytes(header: Mapping[str, Any]) -> bytes:
    return (json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def write_field_file(path: str | Path, grid: Grid, meta: Mapping[str, Any], fields: Mapping[str, np.ndarray]) -> Path:
    """Write named (ny, nx) blocks, y index slowest."""
    path = Path(path)
    header = {
        "schema_version": SCHEMA_VERSION,
        "nx": grid.nx,
        "ny": grid.ny,
        "stretch": float(grid.stretch),
        **{k: meta[k] for k in ("t", "nu1", "nu2", "regime")},
        "field_names": list(fields),
        **_FORMAT,
    }
    payload = b"".join(np.ascontiguousarray(a, dtype=_DTYPE).tobytes() for a in fields.values())
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_header_bytes(header) + payload)
    return path


def read_field_file(path: str | Path) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Parse and validate a field file; returns (header, name -> (ny, nx) array)."""
    path = Path(path)
    if not path.is_file():
        raise SnapshotError(f"snapshot not found: {path}")
    raw = path.read_bytes()
    head, sep, payload = raw.partition(b"\n")
    if not sep:
        raise SnapshotError(f"{path}: missing header line")
    try:
        header = json.loads(head.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"{path}: corrupt header ({exc})") from exc
    if not isinstance(header, dict):
        raise SnapshotError(f"{path}: corrupt header (not an object)")
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise SnapshotError(f"{path}: header lacks {', '.join(missing)}")
    if header["schema_version"] != SCHEMA_VERSION:
        raise SnapshotError(f"{path}: unsupported schema_version {header['schema_version']!r}")
    for key, expected in _FORMAT.items():
        if header[key] != expected:
            raise SnapshotError(f"{path}: unsupported {key} {header[key]!r}")
    nx, ny = int(header["nx"]), int(header["ny"])
    names = list(header["field_names"])
    expected_len = len(names) * nx * ny * _DTYPE.itemsize
    if len(payload) != expected_len:
        raise SnapshotError(f"{path}: payload size mismatch ({len(payload)} bytes, expected {expected_len})")
    data = np.frombuffer(payload, dtype=_DTYPE).reshape(len(names), ny, nx)
    return header, {name: data[i].astype(float) for i, name in enumerate(names)}


# ----------------------------
# Snapshots
# ----------------------------

def _meta(s: FlowState) -> Dict[str, Any]:
    return {"t": float(s.t), "nu1": float(s.nu1), "nu2": float(s.nu2), "regime": Regime(s.regime).value}


def write_snapshot(path: str | Path, s: FlowState) -> Path:
    """psi, omega, mean_u (repeated along x), u and v as physical blocks.

    u and v are recomputed from the physical psi so that writing a state
    read back from disk reproduces the same bytes.
    """
    g = s.grid
    psi = to_physical(s.psi)
    u, v = velocity_from_state(replace(s, psi=psi))
    fields = {
        "psi": psi.data,
        "omega": to_physical(s.omega).data,
        "mean_u": np.repeat(s.mean_u[:, None], g.nx, axis=1),
        "u": u.data,
        "v": v.data,
    }
    return write_field_file(path, g, _meta(s), fields)


def read_snapshot(path: str | Path) -> FlowState:
    """Load a snapshot as a state with physical psi/omega and no step history."""
    header, fields = read_field_file(path)
    if tuple(header["field_names"]) != SNAPSHOT_FIELDS:
        raise SnapshotError(f"{path}: expected fields {list(SNAPSHOT_FIELDS)}, got {header['field_names']}")
    grid = build_grid(int(header["nx"]), int(header["ny"]), float(header["stretch"]))
    try:
        s = FlowState(
            psi=ScalarField(grid, Rep.PHYSICAL, fields["psi"], BCTag.BOTH_WALLS_ZERO),
            omega=ScalarField(grid, Rep.PHYSICAL, fields["omega"]),
            mean_u=fields["mean_u"][:, 0].copy(),
            t=float(header["t"]),
            nu1=float(header["nu1"]),
            nu2=float(header["nu2"]),
            regime=Regime(header["regime"]),
        )
    except ValueError as exc:
        raise SnapshotError(f"{path}: {exc}") from exc
    u, v = velocity_from_state(s)
    scale = max(1.0, float(np.max(np.abs(fields["u"]))), float(np.max(np.abs(fields["v"]))))
    drift = max(np.max(np.abs(u.data - fields["u"])), np.max(np.abs(v.data - fields["v"])))
    if drift > CROSS_CHECK_TOL * scale:
        raise SnapshotError(f"{path}: stored velocity disagrees with psi/mean_u by {drift:.3e}")
    return s


def write_pressure(path: str | Path, s: FlowState, p: ScalarField, q: ScalarField) -> Path:
    return write_field_file(path, s.grid, _meta(s), {"p": to_physical(p).data, "q": to_physical(q).data})


# ----------------------------
# Series and study artifacts
# ----------------------------

def write_series(path: str | Path, series: Iterable[DiagnosticsRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    series_frame(series).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def read_series(path: str | Path) -> pd.DataFrame:
    df = pd.read_csv(path)
    if list(df.columns) != list(CSV_COLUMNS):
        raise ValueError(f"{path}: unexpected columns {list(df.columns)}")
    return df


def series_name(key: str) -> str:
    """'limit' -> series_limit.csv, '0.001' -> series_nu2_0.001.csv."""
    return "series_limit.csv" if key == "limit" else f"series_nu2_{float(key):g}.csv"


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_study(out_dir: str | Path, result) -> Path:
    """study_summary.json plus one CSV series per member run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for key, series in result.series.items():
        write_series(out_dir / series_name(key), series)
    path = out_dir / SUMMARY_NAME
    path.write_text(json.dumps(result.to_summary(), indent=2, sort_keys=True, default=_json_default), encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def audit_table(summary: Mapping[str, Any]) -> pd.DataFrame:
    """Flatten the fits and audit spreads of a summary into (quantity, value, residual) rows."""
    rows = []
    for r, fit in summary.get("fits", {}).get("alpha", {}).items():
        rows.append({"quantity": f"alpha_r{r}", "value": None if fit is None else fit["alpha"],
                     "residual": None if fit is None else fit["residual"]})
    slope = summary.get("fits", {}).get("gradq_integral_slope")
    rows.append({"quantity": "gradq_integral_slope", "value": None if slope is None else slope["alpha"],
                 "residual": None if slope is None else slope["residual"]})
    for name, value in summary.get("audits", {}).items():
        rows.append({"quantity": name, "value": value, "residual": None})
    rows.append({"quantity": "limit_budget_residual", "value": summary.get("limit_budget_residual"), "residual": None})
    return pd.DataFrame(rows, columns=["quantity", "value", "residual"])


def load_study(out_dir: str | Path) -> Tuple[Dict[str, Any], pd.DataFrame, pd.DataFrame]:
    """(summary, member table, audit table) from a study output directory."""
    path = Path(out_dir) / SUMMARY_NAME
    summary = json.loads(path.read_text(encoding="utf-8"))
    return summary, pd.DataFrame(summary.get("members", [])), audit_table(summary)


def study_tables_to_excel(tables: Mapping[str, pd.DataFrame]) -> bytes:
    """One sheet per table, for the download button."""
    buf = io.BytesIO()
    with pd.ExcelWriter(buf, engine="openpyxl") as writer:
        for name, df in tables.items():
            df.to_excel(writer, sheet_name=name[:31], index=False)
    return buf.getvalue()


def list_series(out_dir: str | Path) -> Sequence[Path]:
    return sorted(Path(out_dir).glob("series_*.csv"))
