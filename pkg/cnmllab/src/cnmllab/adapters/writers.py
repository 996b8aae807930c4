"""Output files. Every write goes to a temp file in the target directory and is renamed into place."""
from __future__ import annotations
import json
import logging
import os
from pathlib import Path
import tempfile
from typing import Any, Iterable, Sequence, Union

import numpy as np

# - own - #
from cnmllab.domain.csvfmt import csv_text, fmt_number, fmt_point
from cnmllab.domain.grid import GridPrior
from cnmllab.domain.table import ConditionalTable, RiskCurve

logger = logging.getLogger(__name__)


class OutputDir:
    """A directory owned by one command run; files are written whole or not at all."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.root / name

    def write_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", suffix=".tmp", dir=self.root)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        logger.info("wrote %s", target)
        return target

    def write_json(self, name: str, doc: Any) -> Path:
        return self.write_text(name, json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return self.write_text(name, csv_text(header, ([_cell(v) for v in r] for r in rows)))

    # ---------- domain objects ----------

    def write_table(self, table: ConditionalTable, name: str = None) -> Path:
        return self.write_text(f"{name or table.name}.csv", table.to_csv())

    def write_prior(self, name: str, prior: GridPrior) -> Path:
        return self.write_text(name, prior.to_csv())

    def write_risk_curve(self, curve: RiskCurve, name: str = None) -> Path:
        return self.write_text(f"risk_{name or curve.name}.csv", curve.to_csv())

    def write_regret(self, name: str, table: ConditionalTable, regrets: np.ndarray) -> Path:
        rows = (
            (j, k, float(regrets[a, b]))
            for a, j in enumerate(table.rows)
            for b, k in enumerate(table.cols)
        )
        return self.write_csv(name, ("j", "k", "regret"), rows)


def _cell(v: Any) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (tuple, list)):
        return fmt_point(v)
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt_number(float(v))


def gnuplot_script(csv_names: Sequence[str], columns: Sequence[str], title: str = "KL risk") -> str:
    """Plot every named column against theta, one panel per CSV."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'theta'",
        "set ylabel 'risk (nats)'",
        f"set multiplot layout {len(csv_names)},1 title '{title}'",
    ]
    for name in csv_names:
        plots = ", ".join(f"'{name}' using 1:{i + 2} with lines" for i in range(len(columns)))
        lines += [f"set title '{name}'", f"plot {plots}"]
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"
