"""Configuration parsing and result emission.

Config documents (schema version 1) are flat JSON objects whose keys are
:class:`~weakgauss.experiment.ExperimentConfig` field names. Absent keys take
their defaults, except ``kappa``, which must be given in the file or as an
override. Unknown keys are rejected.

Result tables (CSV header version 1)::

    kappa,ensemble_size,inv_dqm,scheme,d1_mean,d1_se,d2_mean,d2_se,n_states,n_runs,master_seed

one row per (kappa, ensemble size, grid point, scheme), sorted in that key
order, floats written with 9 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from weakgauss.errors import ConfigError
from weakgauss.experiment import ExperimentConfig, SweepResult
from weakgauss.protocol import Scheme

CONFIG_SCHEMA_VERSION = 1
CSV_HEADER_VERSION = 1
CSV_COLUMNS = (
    "kappa",
    "ensemble_size",
    "inv_dqm",
    "scheme",
    "d1_mean",
    "d1_se",
    "d2_mean",
    "d2_se",
    "n_states",
    "n_runs",
    "master_seed",
)
PANEL_COLUMNS = ("inv_dqm", "d1_weak", "d1_proj", "d2_weak", "d2_proj")

_CONFIG_FIELDS = {f.name for f in fields(ExperimentConfig)}
_INT_FIELDS = {"n_states", "n_runs", "master_seed", "kappa_index"}
_FLOAT_FIELDS = {"kappa"}
_BOOL_FIELDS = {"deconvolve", "weighting", "printed_d2"}
_INT_LIST_FIELDS = {"ensemble_sizes"}
_FLOAT_LIST_FIELDS = {"inv_dqm_grid", "u_range", "center_range"}


def fmt(x: float) -> str:
    return format(float(x), ".9g")


@dataclass(frozen=True)
class ResultRow:
    kappa: float
    ensemble_size: int
    inv_dqm: float
    scheme: str
    d1_mean: float
    d1_se: float
    d2_mean: float
    d2_se: float
    n_states: int
    n_runs: int
    master_seed: int

    def sort_key(self):
        return (self.kappa, self.ensemble_size, self.inv_dqm, self.scheme)

    def as_strings(self) -> list[str]:
        return [
            fmt(self.kappa),
            str(self.ensemble_size),
            fmt(self.inv_dqm),
            self.scheme,
            fmt(self.d1_mean),
            fmt(self.d1_se),
            fmt(self.d2_mean),
            fmt(self.d2_se),
            str(self.n_states),
            str(self.n_runs),
            str(self.master_seed),
        ]


# --- config -----------------------------------------------------------------


def _coerce(name, value):
    """Convert a decoded JSON value (or CLI string) to the field's type."""
    try:
        if name in _BOOL_FIELDS:
            if isinstance(value, str):
                low = value.strip().lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            if not isinstance(value, bool):
                raise ValueError(value)
            return value
        if name in _INT_FIELDS:
            if isinstance(value, bool):
                raise ValueError(value)
            if isinstance(value, float):
                if not value.is_integer():
                    raise ValueError(value)
                return int(value)
            return int(value)
        if name in _FLOAT_FIELDS:
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
        if name in _INT_LIST_FIELDS:
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            if not isinstance(value, (list, tuple)):
                raise ValueError(value)
            return tuple(_coerce("n_runs", v) for v in value)
        if name in _FLOAT_LIST_FIELDS:
            if isinstance(value, str):
                value = parse_float_list(value)
            if not isinstance(value, (list, tuple)) or any(isinstance(v, bool) for v in value):
                raise ValueError(value)
            return tuple(float(v) for v in value)
        if name == "average_mode":
            if not isinstance(value, str):
                raise ValueError(value)
            return value
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: cannot interpret {value!r}", field=name) from exc
    raise ConfigError(f"unknown config key {name!r}", field=name)


def parse_float_list(text: str) -> list[float]:
    """Parse ``"a,b,c"`` or ``"geom:START:STOP:NUM"`` / ``"lin:START:STOP:NUM"``."""
    text = text.strip()
    for prefix, fn in (("geom:", np.geomspace), ("lin:", np.linspace)):
        if text.startswith(prefix):
            start, stop, num = text[len(prefix) :].split(":")
            return [float(x) for x in fn(float(start), float(stop), int(num))]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_config(data: bytes | str, overrides: dict | None = None) -> ExperimentConfig:
    """Build a validated config from a JSON document plus overrides.

    Override values may be native types or strings (as given on a command
    line) and take precedence over file values.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError(f"config is not valid UTF-8: {exc}") from exc
    raw = {}
    if data.strip():
        try:
            raw = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"malformed config at line {exc.lineno}, column {exc.colno}: {exc.msg}", line=exc.lineno
            ) from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    merged = dict(raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
    merged.pop("schema_version", None)
    unknown = sorted(set(merged) - _CONFIG_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}", field=unknown[0])
    if "kappa" not in merged:
        raise ConfigError("kappa is required (no default temperature)", field="kappa")
    values = {k: _coerce(k, v) for k, v in merged.items()}
    return ExperimentConfig(**values)


def load_config(path, overrides=None) -> ExperimentConfig:
    data = b"" if path is None else Path(path).read_bytes()
    return parse_config(data, overrides)


# --- rows -------------------------------------------------------------------


def result_rows(result: SweepResult, schemes=(Scheme.PROJECTIVE_BASELINE, Scheme.WEAK_SEQUENTIAL)) -> list[ResultRow]:
    cfg = result.config
    rows = []
    for n, pts in result.points.items():
        for pt in pts:
            for scheme in schemes:
                tag = "proj" if scheme is Scheme.PROJECTIVE_BASELINE else "weak"
                rows.append(
                    ResultRow(
                        kappa=cfg.kappa,
                        ensemble_size=n,
                        inv_dqm=pt.inv_dqm,
                        scheme=scheme.value,
                        d1_mean=getattr(pt, f"d1_{tag}_mean"),
                        d1_se=getattr(pt, f"d1_{tag}_se"),
                        d2_mean=getattr(pt, f"d2_{tag}_mean"),
                        d2_se=getattr(pt, f"d2_{tag}_se"),
                        n_states=cfg.n_states,
                        n_runs=cfg.n_runs,
                        master_seed=cfg.master_seed,
                    )
                )
    rows.sort(key=ResultRow.sort_key)
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.as_strings())
    return buf.getvalue()


def rows_to_json(rows) -> str:
    objs = []
    for r in rows:
        s = r.as_strings()
        obj = {}
        for col, text in zip(CSV_COLUMNS, s):
            if col == "scheme":
                obj[col] = text
            elif col in ("ensemble_size", "n_states", "n_runs", "master_seed"):
                obj[col] = int(text)
            else:
                obj[col] = float(text)
        objs.append(obj)
    return json.dumps(objs, indent=1) + "\n"


def _write_text(path, text: str):
    path = Path(path)
    # whole-file replace
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def emit_rows(result_or_rows, fmt_name: str, path) -> None:
    rows = result_or_rows if isinstance(result_or_rows, list) else result_rows(result_or_rows)
    if fmt_name == "csv":
        text = rows_to_csv(rows)
    elif fmt_name == "json":
        text = rows_to_json(rows)
    else:
        raise ValueError(f"unknown output format {fmt_name!r}")
    _write_text(path, text)


def read_rows(path) -> list[ResultRow]:
    """Read a CSV or JSON table written by :func:`emit_rows`."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("["):
        records = json.loads(text)
    else:
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected CSV header {reader.fieldnames!r}")
        records = list(reader)
    rows = []
    for rec in records:
        rows.append(
            ResultRow(
                kappa=float(rec["kappa"]),
                ensemble_size=int(rec["ensemble_size"]),
                inv_dqm=float(rec["inv_dqm"]),
                scheme=str(rec["scheme"]),
                d1_mean=float(rec["d1_mean"]),
                d1_se=float(rec["d1_se"]),
                d2_mean=float(rec["d2_mean"]),
                d2_se=float(rec["d2_se"]),
                n_states=int(rec["n_states"]),
                n_runs=int(rec["n_runs"]),
                master_seed=int(rec["master_seed"]),
            )
        )
    return rows


def write_plot_data(rows, out_dir) -> list[Path]:
    """Write one panel file per (kappa, ensemble size) for plotting d1/d2 curves.

    Panels missing one of the two schemes get ``nan`` in that column.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    panels: dict = {}
    for r in rows:
        cell = panels.setdefault((r.kappa, r.ensemble_size), {}).setdefault(r.inv_dqm, {})
        tag = "proj" if r.scheme == Scheme.PROJECTIVE_BASELINE.value else "weak"
        cell[f"d1_{tag}"] = r.d1_mean
        cell[f"d2_{tag}"] = r.d2_mean
    written = []
    for (kappa, n), cells in sorted(panels.items()):
        lines = [",".join(PANEL_COLUMNS)]
        for inv in sorted(cells):
            c = cells[inv]
            vals = [inv] + [c.get(col, math.nan) for col in PANEL_COLUMNS[1:]]
            lines.append(",".join(fmt(v) for v in vals))
        path = out_dir / f"panel_kappa{fmt(kappa)}_n{n}.csv"
        _write_text(path, "\n".join(lines) + "\n")
        written.append(path)
    return written
