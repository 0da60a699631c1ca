"""Run manifests and their canonical JSON / CSV serialisation."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

__all__ = ["VERDICTS", "RunManifest", "verdict", "emit_report", "write_report", "utc_timestamp"]

VERDICTS = ("pass", "fail", "skipped", "saturated")


def verdict(ok) -> str:
    return "pass" if ok else "fail"


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _plain(obj):
    """Convert to JSON-ready builtins; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


@dataclass
class RunManifest:
    command: str
    config: dict
    results: dict
    verdicts: dict = field(default_factory=dict)
    version: str = ""
    timestamp: Optional[str] = None

    def __post_init__(self):
        bad = {k: v for k, v in self.verdicts.items() if v not in VERDICTS}
        if bad:
            raise ValueError(f"verdicts must be one of {VERDICTS}: {bad}")
        if not self.version:
            from . import __version__
            self.version = __version__

    @property
    def all_pass(self) -> bool:
        return all(v in ("pass", "skipped") for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return _plain({"command": self.command, "config": self.config, "results": self.results,
                       "verdicts": self.verdicts, "version": self.version,
                       "timestamp": self.timestamp})


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and not all(isinstance(v, (dict, list)) for v in obj) and obj:
        yield prefix, ";".join("" if v is None else repr(v) if isinstance(v, float) else str(v)
                               for v in obj)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, "" if obj is None else repr(obj) if isinstance(obj, float) else str(obj)


def emit_report(manifest: RunManifest, fmt: str = "json") -> bytes:
    """Canonical bytes: JSON with sorted keys, or a two-column key,value CSV."""
    data = manifest.to_dict()
    if fmt == "json":
        return (json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(data):
            w.writerow([k, v])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(path: str, payload: bytes) -> None:
    try:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report to {path!r}: {exc.strerror}") from exc
