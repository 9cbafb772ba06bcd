"""CSV/JSON emission with a provenance header, and volatility CSV I/O."""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .volatility import (PriceFormatError, VolatilitySeries, RETURNS_PER_DAY,
                         compute_volatility, load_prices)


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def header_line(cfg_hash: str, seed: int) -> str:
    return f"# retscale {__version__} config={cfg_hash} seed={seed}\n"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], *, cfg_hash: str, seed: int) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header_line(cfg_hash, seed))
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_text(path, body: str, *, cfg_hash: str, seed: int) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header_line(cfg_hash, seed))
        fh.write(body)
    return path


def write_json(path, obj, *, cfg_hash: str, seed: int) -> Path:
    """JSON has no comments, so provenance goes in a leading ``_meta`` key."""
    path = Path(path)
    payload = {"_meta": {"tool": f"retscale {__version__}", "config": cfg_hash, "seed": seed}}
    payload.update(obj)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=False, allow_nan=True)
        fh.write("\n")
    return path


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            yield line


def sniff_kind(path) -> str:
    for line in _data_lines(path):
        head = [h.strip().lower() for h in line.strip().split(",")]
        if head == ["date", "minute", "price"]:
            return "prices"
        if head == ["day", "minute", "v"]:
            return "volatility"
        break
    raise PriceFormatError("unrecognized header (want date,minute,price or day,minute,v)",
                           line=1, source=str(path))


def instrument_id(path) -> str:
    name = Path(path).name
    for suffix in (".surrogate.volatility.csv", ".volatility.csv", ".csv"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return Path(path).stem


def read_volatility_csv(path, instrument: str | None = None) -> VolatilitySeries:
    rows = list(_data_lines(path))
    if not rows or [h.strip() for h in rows[0].strip().split(",")] != ["day", "minute", "v"]:
        raise PriceFormatError("expected header day,minute,v", source=str(path))
    try:
        arr = np.loadtxt(rows[1:], delimiter=",", ndmin=2) if len(rows) > 1 else np.empty((0, 3))
    except ValueError as exc:
        raise PriceFormatError(f"malformed volatility row ({exc})", source=str(path)) from None
    return VolatilitySeries(instrument or instrument_id(path), arr[:, 0].astype(np.int64),
                            arr[:, 1].astype(np.int64), arr[:, 2].copy(),
                            np.ones(RETURNS_PER_DAY), 1.0)


def read_series(path) -> VolatilitySeries:
    """Volatility from either a price CSV or a volatility CSV."""
    kind = sniff_kind(path)
    if kind == "volatility":
        return read_volatility_csv(path)
    with open(path, "rb") as fh:
        prices = load_prices(fh, instrument_id(path), name=str(path))
    return compute_volatility(prices)


def volatility_rows(v: VolatilitySeries):
    return zip(v.day.tolist(), v.minute.tolist(), v.values.tolist())


def discover_inputs(inputs: Sequence[str]) -> list[Path]:
    files: list[Path] = []
    for p in inputs:
        p = Path(p)
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.suffix == ".csv" and q.is_file()))
        elif p.is_file():
            files.append(p)
        else:
            raise FileNotFoundError(f"input not found: {p}")
    return files


def ensure_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory not writable: {path}")
    return path
