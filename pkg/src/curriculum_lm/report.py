"""Summaries and perplexity curves across training runs."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .curriculum import read_curriculum, steps_to_full_competence
from .errors import DataError
from .trainer import MetricsRecord, read_metrics

UNBOUNDED = "inf"
SUMMARY_FIELDS = ("run", "method", "lambda0", "increment", "final_valid_ppl", "best_valid_ppl", "steps_to_full_competence")


@dataclass(frozen=True)
class RunSummary:
    run: str
    method: str
    lambda0: float
    increment: float
    final_valid_ppl: float
    best_valid_ppl: float
    steps_to_full_competence: float  # math.inf when the schedule never saturates

    def row(self) -> list[str]:
        stf = UNBOUNDED if math.isinf(self.steps_to_full_competence) else str(int(self.steps_to_full_competence))
        return [
            self.run, self.method, repr(self.lambda0), repr(self.increment),
            f"{self.final_valid_ppl:.4f}", f"{self.best_valid_ppl:.4f}", stf,
        ]


def summarize_run(metrics_path: str | Path) -> RunSummary:
    """Summarise one run directory's metrics.csv; schedule comes from curriculum.tsv beside it."""
    metrics_path = Path(metrics_path)
    records = read_metrics(metrics_path)
    evals = [r.valid_ppl for r in records if r.valid_ppl is not None]
    if not evals:
        raise DataError(f"{metrics_path}: no validation perplexity recorded")
    cur_path = metrics_path.with_name("curriculum.tsv")
    if cur_path.exists():
        cur = read_curriculum(cur_path)
        method, lambda0, inc = cur.method, cur.lambda0, cur.lambda_increment
    else:
        # without the curriculum file recover the schedule from the first two steps
        method = "?"
        lambda0 = records[0].lam
        inc = records[1].lam - records[0].lam if len(records) > 1 else 0.0
    return RunSummary(
        run=metrics_path.parent.name,
        method=method,
        lambda0=lambda0,
        increment=inc,
        final_valid_ppl=evals[-1],
        best_valid_ppl=min(evals),
        steps_to_full_competence=steps_to_full_competence(lambda0, inc),
    )


def summarize(metrics_paths: Sequence[str | Path]) -> list[RunSummary]:
    return sorted((summarize_run(p) for p in metrics_paths), key=lambda s: (s.best_valid_ppl, s.run))


def summary_csv(rows: Sequence[RunSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for r in rows:
        w.writerow(r.row())
    return buf.getvalue()


def summary_table(rows: Sequence[RunSummary]) -> str:
    table = [list(SUMMARY_FIELDS)] + [r.row() for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(SUMMARY_FIELDS))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table) + "\n"


def curve_points(records: Sequence[MetricsRecord]) -> str:
    lines = ["step,lambda,valid_ppl"]
    lines += [f"{r.step},{r.lam!r},{r.valid_ppl!r}" for r in records if r.valid_ppl is not None]
    return "\n".join(lines) + "\n"


def write_report(metrics_paths: Sequence[str | Path], out_dir: str | Path) -> list[RunSummary]:
    """Write summary.csv, summary.txt and curves/<run>.csv under `out_dir`."""
    out = Path(out_dir)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    rows = summarize(metrics_paths)
    (out / "summary.csv").write_text(summary_csv(rows), encoding="utf-8")
    (out / "summary.txt").write_text(summary_table(rows), encoding="utf-8")
    for p in metrics_paths:
        p = Path(p)
        (out / "curves" / f"{p.parent.name}.csv").write_text(curve_points(read_metrics(p)), encoding="utf-8")
    return rows
