"""Config files, count-table ingestion, and report/table emission.

Configs are single JSON documents with a schema-versioned header field.
Reports and data tables are plain text with one metadata header line
(config hash, seed, tool version, timestamp); re-running an identical
config with the same seed reproduces the files byte-for-byte apart from
the timestamp inside that header line.  Floats are written with ``repr``
so tables re-parse to bit-identical values.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import CountTable

CONFIG_SCHEMA = "qsvlab/1"

COMMANDS = ("verify", "estimate", "scaling", "chsh", "tomography", "tune", "compare")


class ConfigError(ValueError):
    """Invalid experiment configuration, with the offending field named."""


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
    validate_config(config)
    return config


def _require(config: dict, key: str, types, where: str = "config"):
    if key not in config:
        raise ConfigError(f"{where}: missing required field {key!r}")
    value = config[key]
    if not isinstance(value, types):
        raise ConfigError(
            f"{where}: field {key!r} has type {type(value).__name__}, "
            f"expected {types if isinstance(types, type) else '/'.join(t.__name__ for t in types)}"
        )
    return value


def validate_config(config: dict) -> None:
    if not isinstance(config, dict):
        raise ConfigError("config document must be a JSON object")
    if config.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"field 'schema' must be {CONFIG_SCHEMA!r}, got {config.get('schema')!r}")
    command = _require(config, "command", str)
    if command not in COMMANDS:
        raise ConfigError(f"field 'command' must be one of {COMMANDS}, got {command!r}")
    _require(config, "seed", int)
    if config.get("oracle_columns") and not config.get("test_mode"):
        raise ConfigError(
            "field 'oracle_columns': oracle output is only available in test mode "
            "(set 'test_mode': true)"
        )
    if command in ("verify", "estimate"):
        _require(config, "strategy", dict)
        _require(config, "source", dict)
        _require(config, "n_tests", int)
    if command == "scaling":
        _require(config, "strategy", dict)
        _require(config, "source", dict)
        grid = _require(config, "n_grid", list)
        if not grid or any(not isinstance(x, int) or x < 1 for x in grid):
            raise ConfigError("field 'n_grid' must be a nonempty list of positive integers")
        _require(config, "trials", int)
    if command == "chsh":
        _require(config, "table", str)
    if command == "tomography":
        _require(config, "source", dict)
    if command == "tune":
        _require(config, "device", dict)
        method = _require(config, "method", str)
        if method not in ("qsv", "qst"):
            raise ConfigError(f"field 'method' must be 'qsv' or 'qst', got {method!r}")
        _require(config, "sample_budget", int)
    if command == "compare":
        _require(config, "source", dict)


# ---------------------------------------------------------------------------
# count tables (CHSH input)

def ingest_count_table(path: str | Path) -> CountTable:
    """Parse the 5x5 coincidence-count grid (header row/column + 16 cells).

    First row: column analyzer angles (photon B); first column: row angles
    (photon A); angles normalised to degrees in [0, 180).
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError(f"{path}: missing data rows (need header plus 4 count rows)")
    if len(lines) != 5:
        raise ValueError(f"{path}: expected 5 rows (header + 4), got {len(lines)}")

    def split(ln: str) -> list[str]:
        sep = "," if "," in ln else "\t"
        return [c.strip() for c in ln.split(sep)]

    header = split(lines[0])
    if len(header) != 5:
        raise ValueError(f"{path}: header row has {len(header)} cells, expected 5")
    col_angles = []
    for j, cell in enumerate(header[1:], start=2):
        try:
            col_angles.append(float(cell) % 180.0)
        except ValueError:
            raise ValueError(f"{path}: header row, column {j}: {cell!r} is not an angle") from None

    row_angles = []
    counts = np.zeros((4, 4), dtype=np.int64)
    for i, ln in enumerate(lines[1:], start=1):
        cells = split(ln)
        if len(cells) != 5:
            raise ValueError(f"{path}: row {i + 1} has {len(cells)} cells, expected 5")
        try:
            row_angles.append(float(cells[0]) % 180.0)
        except ValueError:
            raise ValueError(f"{path}: row {i + 1}, column 1: {cells[0]!r} is not an angle") from None
        for j, cell in enumerate(cells[1:], start=1):
            if cell == "":
                raise ValueError(f"{path}: row {i + 1}, column {j + 1} is blank")
            try:
                value = int(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: row {i + 1}, column {j + 1}: {cell!r} is not an integer count"
                ) from None
            if value < 0:
                raise ValueError(
                    f"{path}: row {i + 1}, column {j + 1}: negative count {value}"
                )
            counts[i - 1, j - 1] = value
    return CountTable(tuple(row_angles), tuple(col_angles), counts)


def count_table_to_text(table: CountTable) -> str:
    lines = ["," + ",".join(_num(a) for a in table.col_angles)]
    for a, row in zip(table.row_angles, table.counts):
        lines.append(_num(a) + "," + ",".join(str(int(c)) for c in row))
    return "\n".join(lines) + "\n"


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


# ---------------------------------------------------------------------------
# reports and data tables

def _meta_line(kind: str, command: str, cfg_hash: str, seed: int) -> str:
    ts = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return (
        f"# qsvlab-{kind} v{__version__} command={command} "
        f"config={cfg_hash} seed={seed} generated={ts}"
    )


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_report(path: Path, command: str, cfg_hash: str, seed: int, fields: dict) -> None:
    lines = [_meta_line("report", command, cfg_hash, seed)]
    lines += [f"{k} = {format_value(v)}" for k, v in sorted(fields.items())]
    path.write_text("\n".join(lines) + "\n")


def write_table(
    path: Path,
    command: str,
    cfg_hash: str,
    seed: int,
    columns: list[str],
    rows: list[tuple],
) -> None:
    lines = [_meta_line("table", command, cfg_hash, seed)]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_table(path: str | Path) -> dict[str, list]:
    """Re-parse an emitted data table into columns of Python values."""
    lines = Path(path).read_text().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    if not body:
        raise ValueError(f"{path}: empty table")
    columns = body[0].split(",")
    out: dict[str, list] = {c: [] for c in columns}
    for ln in body[1:]:
        for c, cell in zip(columns, ln.split(",")):
            try:
                value: object = int(cell)
            except ValueError:
                try:
                    value = float(cell)
                except ValueError:
                    value = cell
            out[c].append(value)
    return out


def strip_timestamp(text: str) -> str:
    """Drop the generated= token so byte-comparisons ignore the timestamp."""
    lines = text.splitlines()
    if lines and lines[0].startswith("#"):
        lines[0] = " ".join(t for t in lines[0].split() if not t.startswith("generated="))
    return "\n".join(lines)
