"""
Output Writers

Tables go out as CSV (pandas, full float precision) or JSON records; every
run also gets a JSON summary. Optional gnuplot scripts plot the CSV files.
"""

import json
import math
import os
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

import sys
sys.path.append('..')
from config.settings import OUTPUT_SETTINGS
from utils.logger import get_logger

logger = get_logger(__name__)


def _plain(value):
    """numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return [_plain(value.real), _plain(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else "-inf" if value < 0 else "nan"
    return value


def to_json_text(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class ResultWriter:
    """
    Writes the tables of one run into an output directory and remembers
    every file it produced.
    """

    def __init__(self, out_dir: str, fmt: str = None, settings: Dict = None):
        self.settings = settings or OUTPUT_SETTINGS
        self.out_dir = out_dir
        self.format = fmt or self.settings['default_format']
        self.files: List[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def table(self, name: str, rows: Sequence[Dict], columns: Sequence[str]) -> str:
        """Write rows under a fixed header; returns the file path."""
        frame = pd.DataFrame(list(rows), columns=list(columns))
        if self.format == "json":
            path = self._path(f"{name}.json")
            records = [dict(zip(columns, row)) for row in frame.itertuples(index=False)]
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(to_json_text(records))
        else:
            path = self._path(f"{name}.csv")
            frame.to_csv(path, index=False, float_format=self.settings['float_format'],
                         lineterminator="\n")
        self.files.append(path)
        logger.debug(f"Wrote {len(frame)} rows to {path}")
        return path

    def document(self, name: str, payload: Dict) -> str:
        """Write one JSON document as name.json regardless of the table format."""
        path = self._path(f"{name}.json")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(to_json_text(payload))
        self.files.append(path)
        return path

    def summary(self, payload: Dict) -> str:
        return self.document(self.settings['summary_name'].rsplit(".", 1)[0], payload)

    def gnuplot(self, name: str, table: str, x: str, columns: Sequence[str],
                all_columns: Sequence[str], logscale: str = "", title: str = "") -> str:
        """Emit a .gp script plotting `columns` against `x` from table.csv."""
        index = {column: i + 1 for i, column in enumerate(all_columns)}
        lines = [
            "set datafile separator ','",
            "set key autotitle columnhead",
            f"set title '{title or table}'",
            f"set xlabel '{x}'",
        ]
        if logscale:
            lines.append(f"set logscale {logscale}")
        plots = [f"'{table}.csv' using {index[x]}:{index[c]} with linespoints title '{c}'"
                 for c in columns]
        lines.append("plot " + ", \\\n     ".join(plots))
        path = self._path(f"{name}.gp")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
        self.files.append(path)
        return path
