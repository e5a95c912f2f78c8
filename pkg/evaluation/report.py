import csv
from pathlib import Path

import numpy as np

from evaluation.models import ClassMetrics, EvaluationSummary
from exceptions import ConfigurationError
from selection.models import ClassDivergence


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ReportWriter:
    """Writes the CSV outputs of a run into one directory. Floats are written in repr form."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def _write(self, name: str, header: list[str], rows) -> Path:
        path = self.out_dir / name
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(value) for value in row])
        return path

    def metrics(self, rows: list[ClassMetrics], summary: EvaluationSummary, name: str = "metrics.csv") -> Path:
        """
        Writes `class,ap,acc1,acc5,n_test`, one row per class, then a `mean` row with
        mean AP and the normalized accuracies.
        """
        body = [(row.class_id, row.ap, row.acc1, row.acc5, row.n_test) for row in rows]
        body.append(("mean", summary.mean_ap, summary.acc1, summary.acc5, summary.n_test))
        return self._write(name, ["class", "ap", "acc1", "acc5", "n_test"], body)

    def predictions(self, ids: list[str], scores: np.ndarray, labels: np.ndarray, name: str = "predictions.csv") -> Path:
        """Writes `id,label,top1,p_0..p_{C-1}`; unlabeled records (label -1) have an empty label."""
        header = ["id", "label", "top1"] + [f"p_{c}" for c in range(scores.shape[1])]
        top1 = np.argmax(scores, axis=1)
        rows = (
            [record_id, None if label < 0 else int(label), int(top)] + [float(p) for p in row]
            for record_id, label, top, row in zip(ids, labels, top1, scores)
        )
        return self._write(name, header, rows)

    def radii(self, rows: list[dict], name: str = "radii.csv") -> Path:
        header = ["feature", "key", "normalization", "replica", "radius_m"]
        return self._write(name, header, ([row[column] for column in header] for row in rows))

    def selection(self, ranking: list[ClassDivergence], name: str = "selection.csv") -> Path:
        return self._write(name, ["class", "kl_nats", "rank"], ((r.class_id, r.kl_nats, r.rank) for r in ranking))

    def summaries(self, summaries: list[EvaluationSummary], name: str) -> Path:
        return self._write(
            name,
            ["name", "mean_ap", "acc1", "acc5", "n_test"],
            ((s.name, s.mean_ap, s.acc1, s.acc5, s.n_test) for s in summaries),
        )

    def ablation(self, rows: list[dict], name: str = "ablation.csv") -> Path:
        header = ["features", "precat", "postcat", "rl_replicas", "mean_ap", "acc1", "acc5"]
        return self._write(name, header, ([row[column] for column in header] for row in rows))

    def ap_diff(self, rows: list[tuple[int, float, float, float]], name: str = "ap_diff.csv") -> Path:
        return self._write(name, ["class", "ap_a", "ap_b", "delta"], rows)


def read_metrics(path: Path) -> dict[int, float]:
    """Per-class AP of a metrics.csv; classes without AP and the mean row are left out."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"metrics file {path} does not exist")
    with open(path, newline="", encoding="utf-8") as f:
        return {
            int(row["class"]): float(row["ap"])
            for row in csv.DictReader(f)
            if row["class"] != "mean" and row["ap"]
        }


def ap_difference(base: dict[int, float], other: dict[int, float], top_n: int | None = None) -> list[tuple[int, float, float, float]]:
    """
    Per-class AP change from `base` to `other` over their common classes, largest
    gain first (ties by class id). With top_n, keeps the n largest gains and the n
    largest losses.
    """
    rows = [(c, base[c], other[c], other[c] - base[c]) for c in sorted(base.keys() & other.keys())]
    rows.sort(key=lambda row: (-row[3], row[0]))
    if top_n is not None and len(rows) > 2 * top_n:
        rows = rows[:top_n] + rows[-top_n:]
    return rows
