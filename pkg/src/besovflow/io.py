"""Run configuration, norm-series files and binary field snapshots."""
from __future__ import annotations

import csv
import io as _io
import json
import math
import struct
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .corpus import FAMILIES, CorpusSpec
from .monitor import NormSample
from .solver import SimState, SolverConfig
from .spectral import Grid, SpectralField


# ---- configuration ----------------------------------------------------------

class ConfigError(ValueError):
    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class MonitorConfig:
    sample_every: int = 10
    snapshot_every: int = 0
    output_dir: Path = Path("out")
    T0: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    solver: SolverConfig
    monitor: MonitorConfig = field(default_factory=MonitorConfig)
    corpus: CorpusSpec = field(default_factory=CorpusSpec)


# key -> (type, default); ints are accepted where floats are expected
_SCHEMA: dict[str, dict[str, tuple[type, object]]] = {
    "grid": {"N": (int, 32)},
    "solver": {
        "dt": (float, 1e-3),
        "t_end": (float, 1.0),
        "ic_kind": (str, "taylor_green"),
        "ic_amplitude": (float, 1.0),
        "theta_amplitude": (float, 0.0),
        "rng_seed": (int, 0),
        "nu": (float, 1.0),
        "kappa": (float, 1.0),
    },
    "monitor": {
        "sample_every": (int, 10),
        "snapshot_every": (int, 0),
        "output_dir": (str, "out"),
        "T0": (float, 0.0),
    },
    "corpus": {
        "grids": (list, [32]),
        "families": (list, list(FAMILIES)),
        "count": (int, 4),
        "rng_seed": (int, 0),
        "k_max": (int, 5),
    },
}
_REQUIRED = ("grid", "solver")


def _coerce(section: str, key: str, value, typ, errors: list[str]):
    where = f"[{section}].{key}"
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{where}: expected a number, got {type(value).__name__}")
            return None
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{where}: expected an integer, got {type(value).__name__}")
            return None
        return value
    if not isinstance(value, typ):
        errors.append(f"{where}: expected {typ.__name__}, got {type(value).__name__}")
        return None
    return value


def parse_config(text: str, base_dir: Optional[Path] = None) -> RunConfig:
    """Validate a TOML run configuration, collecting every error before raising.

    Relative ``output_dir`` values resolve against ``base_dir`` (default: cwd).
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"syntax: {exc}"]) from None

    errors: list[str] = []
    values: dict[str, dict] = {}
    for section in doc:
        if section not in _SCHEMA:
            errors.append(f"[{section}]: unknown section")
    for section in _REQUIRED:
        if section not in doc:
            errors.append(f"[{section}]: missing required section")
    for section, schema in _SCHEMA.items():
        raw = doc.get(section, {})
        if not isinstance(raw, dict):
            errors.append(f"[{section}]: expected a table")
            raw = {}
        vals = {k: d for k, (_, d) in schema.items()}
        for key, value in raw.items():
            if key not in schema:
                errors.append(f"[{section}].{key}: unknown key")
                continue
            v = _coerce(section, key, value, schema[key][0], errors)
            if v is not None:
                vals[key] = v
        values[section] = vals

    mon = values["monitor"]
    solver = SolverConfig(
        N=values["grid"]["N"],
        sample_every=mon["sample_every"],
        snapshot_every=mon["snapshot_every"],
        **values["solver"],
    )
    for problem in solver.problems():
        key = problem.split(":", 1)[0]
        section = "grid" if key == "N" else "monitor" if key in mon else "solver"
        errors.append(f"[{section}].{problem}")
    if not (math.isfinite(mon["T0"]) and mon["T0"] >= 0):
        errors.append(f"[monitor].T0: must be >= 0, got {mon['T0']}")

    cv = values["corpus"]
    if not all(isinstance(n, int) and not isinstance(n, bool) for n in cv["grids"]):
        errors.append("[corpus].grids: expected a list of integers")
    if not all(isinstance(f, str) for f in cv["families"]):
        errors.append("[corpus].families: expected a list of strings")
    corpus = None
    if not any(e.startswith("[corpus]") for e in errors):
        try:
            corpus = CorpusSpec(
                grids=tuple(cv["grids"]),
                families=tuple(cv["families"]),
                count=cv["count"],
                rng_seed=cv["rng_seed"],
                k_max=cv["k_max"],
            )
        except ValueError as exc:
            errors.append(f"[corpus]: {exc}")
    if errors:
        raise ConfigError(errors)

    out_dir = Path(mon["output_dir"])
    if not out_dir.is_absolute():
        out_dir = (base_dir or Path.cwd()) / out_dir
    monitor = MonitorConfig(mon["sample_every"], mon["snapshot_every"], out_dir.resolve(), mon["T0"])
    return RunConfig(solver, monitor, corpus)


def load_config(path: Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror or exc}"]) from None
    return parse_config(text, base_dir=path.parent)


def render_config(cfg: RunConfig) -> str:
    s, m, c = cfg.solver, cfg.monitor, cfg.corpus
    doc = {
        "grid": {"N": s.N},
        "solver": {k: getattr(s, k) for k in _SCHEMA["solver"]},
        "monitor": {
            "sample_every": m.sample_every,
            "snapshot_every": m.snapshot_every,
            "output_dir": str(m.output_dir),
            "T0": m.T0,
        },
        "corpus": {
            "grids": list(c.grids),
            "families": list(c.families),
            "count": c.count,
            "rng_seed": c.rng_seed,
            "k_max": c.k_max,
        },
    }
    return tomli_w.dumps(doc)


# ---- norm series -------------------------------------------------------------

SERIES_COLUMNS = tuple(NormSample.columns())


def _fmt(x: float) -> str:
    return repr(float(x))


def series_csv(samples: Iterable[NormSample]) -> str:
    lines = [",".join(SERIES_COLUMNS)]
    for s in samples:
        lines.append(",".join(_fmt(getattr(s, c)) for c in SERIES_COLUMNS))
    return "\n".join(lines) + "\n"


def series_ndjson(samples: Iterable[NormSample]) -> str:
    return "".join(
        json.dumps({c: float(getattr(s, c)) for c in SERIES_COLUMNS}) + "\n" for s in samples
    )


def _write_text(path: Path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_series(samples: Sequence[NormSample], ndjson_path: Path, csv_path: Path) -> None:
    _write_text(ndjson_path, series_ndjson(samples))
    _write_text(csv_path, series_csv(samples))


def read_series(path: Path) -> list[NormSample]:
    """Read either format back; the suffix decides (.csv or .ndjson)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if path.suffix == ".csv":
        rows = list(csv.DictReader(_io.StringIO(text)))
        return [NormSample(**{c: float(r[c]) for c in SERIES_COLUMNS}) for r in rows]
    return [
        NormSample(**{c: float(obj[c]) for c in SERIES_COLUMNS})
        for obj in map(json.loads, text.splitlines())
    ]


# ---- snapshots ----------------------------------------------------------------

SNAPSHOT_MAGIC = b"BSVF"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")
HEADER_BYTES = _HEADER.size  # 40


class SnapshotFormatError(ValueError):
    pass


class BadMagicError(SnapshotFormatError):
    pass


class VersionMismatchError(SnapshotFormatError):
    pass


class TruncatedSnapshotError(SnapshotFormatError):
    pass


class TrailingBytesError(SnapshotFormatError):
    pass


def _ascending(n: int) -> np.ndarray:
    """Storage indices of wavenumbers -N/2+1, ..., N/2 in that order."""
    return (np.arange(n) + n // 2 + 1) % n


def snapshot_bytes(state: SimState) -> bytes:
    n = state.grid.N
    data = np.concatenate([state.u.coeffs, state.theta.coeffs])
    order = _ascending(n)
    data = data[np.ix_(range(data.shape[0]), order, order, order)]
    header = _HEADER.pack(
        SNAPSHOT_MAGIC, SNAPSHOT_VERSION, n, data.shape[0], state.t, state.nu, state.kappa
    )
    return header + np.ascontiguousarray(data, dtype="<c16").tobytes()


def read_snapshot(blob: bytes) -> SimState:
    if len(blob) < HEADER_BYTES:
        raise TruncatedSnapshotError(
            f"snapshot truncated: header needs {HEADER_BYTES} bytes, got {len(blob)}"
        )
    magic, version, n, comps, t, nu, kappa = _HEADER.unpack_from(blob)
    if magic != SNAPSHOT_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {SNAPSHOT_MAGIC!r}")
    if version != SNAPSHOT_VERSION:
        raise VersionMismatchError(
            f"snapshot format version {version}, this reader supports {SNAPSHOT_VERSION}"
        )
    if comps != 4:
        raise SnapshotFormatError(f"expected 4 components (u, theta), header says {comps}")
    expected = HEADER_BYTES + 16 * comps * n**3
    if len(blob) < expected:
        raise TruncatedSnapshotError(
            f"snapshot truncated: expected {expected} bytes, got {len(blob)}"
        )
    if len(blob) > expected:
        raise TrailingBytesError(f"snapshot has {len(blob) - expected} bytes past the expected {expected}")
    grid = Grid(n)
    raw = np.frombuffer(blob, dtype="<c16", offset=HEADER_BYTES).reshape(comps, n, n, n)
    data = np.empty((comps, n, n, n), dtype=complex)
    order = _ascending(n)
    data[np.ix_(range(comps), order, order, order)] = raw
    return SimState(SpectralField(grid, data[:3]), SpectralField(grid, data[3:]), t, nu, kappa)


def write_snapshot(state: SimState, path: Path) -> None:
    try:
        Path(path).write_bytes(snapshot_bytes(state))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def load_snapshot(path: Path) -> SimState:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return read_snapshot(blob)
