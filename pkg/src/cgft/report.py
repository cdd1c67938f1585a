"""Report rendering: delimited + human-readable tables and matplotlib figures.

All writers are deterministic for identical experiment results; the PNG
encoder's software tag is stripped so repeated runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiment import METHOD_LABELS, METHOD_ORDER, ExperimentResult, experiment_state_dict, result_to_report_dict

PNG_METADATA = {"Software": None}

COLUMNS = ("Avg. Pre.", "Avg. Rec.", "Avg. F-Score", "Acc.")


def write_report_txt(result: ExperimentResult, path) -> None:
    report = result_to_report_dict(result)
    label_width = max(len(METHOD_LABELS[m]) for m in METHOD_ORDER) + 2
    lines = ["Meal recognizer evaluation (test split)", ""]
    header = "Method".ljust(label_width) + "".join(c.rjust(14) for c in COLUMNS)
    lines.append(header)
    lines.append("-" * len(header))
    for row in report["methods"]:
        cells = (row["avg_precision"], row["avg_recall"], row["avg_f_score"], row["accuracy"])
        lines.append(row["label"].ljust(label_width) + "".join(f"{c:14.2f}" for c in cells))
    lines.append("")
    lines.append("Validation fitness (1 - accuracy):")
    for row in report["methods"]:
        lines.append(f"  {row['label']:<{label_width}} {row['validation_fitness']:.6f}")
    for model_id, fit in report["per_model_validation_fitness"].items():
        lines.append(f"  single model {model_id:<{label_width - 13}} {fit:.6f}")
    lines.append("")
    lines.append("Fusion weights:")
    for row in report["methods"]:
        weights = " ".join(f"{w:.4f}" for w in row["weights"])
        lines.append(f"  {row['label']:<{label_width}} {weights}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_report_csv(result: ExperimentResult, path) -> None:
    report = result_to_report_dict(result)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "avg_precision", "avg_recall", "avg_f_score", "accuracy",
             "validation_fitness", "weights"]
        )
        for row in report["methods"]:
            writer.writerow(
                [
                    row["label"],
                    f"{row['avg_precision']:.2f}",
                    f"{row['avg_recall']:.2f}",
                    f"{row['avg_f_score']:.2f}",
                    f"{row['accuracy']:.2f}",
                    f"{row['validation_fitness']:.6f}",
                    " ".join(f"{w:.6f}" for w in row["weights"]),
                ]
            )


def write_report_json(result: ExperimentResult, path) -> None:
    Path(path).write_text(
        json.dumps(result_to_report_dict(result), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def write_experiment_state(result: ExperimentResult, path) -> None:
    Path(path).write_text(
        json.dumps(experiment_state_dict(result), sort_keys=True) + "\n", encoding="utf-8"
    )


def plot_convergence(result: ExperimentResult, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method, color in (("pso", "tab:blue"), ("ga", "tab:orange")):
        history = result.methods[method].history
        if history:
            ax.plot(range(len(history)), history, label=METHOD_LABELS[method], color=color)
    equal_fit = result.methods["equal"].validation_fitness
    ax.axhline(equal_fit, color="tab:gray", linestyle="--", linewidth=1, label="Equal weights")
    ax.set_xlabel("iteration")
    ax.set_ylabel("validation error")
    ax.set_title("Fusion-weight search convergence")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=PNG_METADATA)
    plt.close(fig)


def plot_method_metrics(result: ExperimentResult, path) -> None:
    report = result_to_report_dict(result)
    fields = ("avg_precision", "avg_recall", "avg_f_score", "accuracy")
    x = range(len(report["methods"]))
    width = 0.2
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for i, (field_name, column) in enumerate(zip(fields, COLUMNS)):
        values = [row[field_name] for row in report["methods"]]
        ax.bar([xi + (i - 1.5) * width for xi in x], values, width, label=column)
    ax.set_xticks(list(x))
    ax.set_xticklabels([row["label"] for row in report["methods"]], rotation=10)
    ax.set_ylabel("percent")
    ax.set_ylim(0, 105)
    ax.set_title("Fusion methods on the test split")
    ax.legend(ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=PNG_METADATA)
    plt.close(fig)


def plot_cgm_trace(readings, meals, path, title="CGM trace") -> None:
    """Glucose-over-time figure with labeled meal markers.

    `meals` is a list of (timestamp, label) pairs; pass [] for a bare trace.
    """
    fig, ax = plt.subplots(figsize=(9, 4))
    times = [r.timestamp for r in readings]
    values = [r.glucose for r in readings]
    ax.plot(times, values, color="tab:blue", linewidth=1.2, marker=".", markersize=3)
    top = max(values) if values else 200.0
    for meal_time, label in meals:
        ax.axvline(meal_time, color="tab:red", linestyle=":", linewidth=1)
        ax.annotate(
            label,
            xy=(meal_time, top),
            rotation=90,
            fontsize=8,
            color="tab:red",
            va="top",
        )
    ax.set_xlabel("time (UTC)")
    ax.set_ylabel("glucose (mg/dl)")
    ax.set_title(title)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=PNG_METADATA)
    plt.close(fig)


def write_report_dir(result: ExperimentResult, out_dir) -> dict[str, Path]:
    """Write the full artifact set; returns the paths keyed by artifact name."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "txt": out / "report.txt",
        "csv": out / "report.csv",
        "json": out / "report.json",
        "experiment": out / "experiment.json",
        "convergence": out / "convergence.png",
        "metrics": out / "metrics.png",
    }
    write_report_txt(result, paths["txt"])
    write_report_csv(result, paths["csv"])
    write_report_json(result, paths["json"])
    write_experiment_state(result, paths["experiment"])
    plot_convergence(result, paths["convergence"])
    plot_method_metrics(result, paths["metrics"])
    return paths
