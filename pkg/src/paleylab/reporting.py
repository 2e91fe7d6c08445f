"""Run reports: JSON-lines as the canonical format, CSV as a flat projection."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, default=_default, sort_keys=True)


@dataclass
class RunReport:
    config: dict
    records: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    wall_time: float = 0.0
    version: str = __version__

    def lines(self) -> list[str]:
        out = [dumps({"kind": "config", "config": self.config, "version": self.version})]
        out += [dumps({"kind": "record", **r}) for r in self.records]
        out.append(dumps({"kind": "summary", "aggregates": self.aggregates, "wall_time": self.wall_time}))
        return out

    def write_jsonl(self, path) -> None:
        Path(path).write_text("\n".join(self.lines()) + "\n")

    def write_csv(self, path, rows: list[dict] | None = None) -> None:
        rows = self.records if rows is None else rows
        flat = [{k: v for k, v in r.items() if _is_scalar(v)} for r in rows]
        cols: list[str] = []
        for r in flat:
            cols += [k for k in r if k not in cols]
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for r in flat:
                w.writerow({k: _default(v) if not isinstance(v, (str, int, float, bool, type(None))) else v
                            for k, v in r.items()})


def _is_scalar(v) -> bool:
    return isinstance(v, (str, int, float, bool, type(None), Fraction, np.integer, np.floating, np.bool_))


def read_jsonl(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def job_map(threads: int):
    """``map`` for independent jobs; order-preserving, so results match serial runs."""
    if threads <= 1:
        return map

    def pmap(fn, *iterables):
        with ProcessPoolExecutor(max_workers=min(threads, os.cpu_count() or 1)) as pool:
            return list(pool.map(fn, *iterables, chunksize=8))

    return pmap
