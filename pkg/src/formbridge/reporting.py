"""Report rendering: aligned text tables, key=value record streams, and
figure files.

Figures always render through the Agg backend straight to files; nothing
here opens a window, so reports behave the same on headless machines.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

from matplotlib import pyplot as plt  # noqa: E402  (backend must be set first)

from .fidelity import BenchmarkRow, ErrorClass  # noqa: E402
from .serving import CostReport  # noqa: E402

__all__ = [
    "fmt_number",
    "format_table",
    "benchmark_table",
    "benchmark_records",
    "cost_table",
    "cost_records",
    "save_benchmark_figure",
    "save_cost_figure",
]


def fmt_number(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def format_table(headers: Sequence[str],
                 rows: Sequence[Sequence[object]]) -> str:
    """Pad every column to its widest cell; numbers right-aligned."""
    cells = [[fmt_number(cell) for cell in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    numeric = [
        all(isinstance(row[i], (int, float)) for row in rows) if rows else False
        for i in range(len(headers))
    ]

    def line(parts: Sequence[str], pad_numeric: bool) -> str:
        out = []
        for i, part in enumerate(parts):
            if numeric[i] and pad_numeric:
                out.append(part.rjust(widths[i]))
            else:
                out.append(part.ljust(widths[i]))
        return "  ".join(out).rstrip()

    text = [line(list(headers), False),
            line(["-" * w for w in widths], False)]
    text.extend(line(row, True) for row in cells)
    return "\n".join(text) + "\n"


# ---------------------------------------------------------------------------
# Benchmark reports
# ---------------------------------------------------------------------------


_BENCH_HEADERS = ("variant", "mean_distortion", "missing", "fabricated",
                  "mutated", "syntax_invalid", "mean_attempts", "runs")


def benchmark_table(rows: Sequence[BenchmarkRow]) -> str:
    table = []
    for row in rows:
        h = row.histogram
        table.append((row.variant, round(row.mean_distortion, 6),
                      h[ErrorClass.MISSING], h[ErrorClass.FABRICATED],
                      h[ErrorClass.MUTATED], h[ErrorClass.SYNTAX_INVALID],
                      round(row.mean_attempts, 3), row.runs))
    return format_table(_BENCH_HEADERS, table)


def benchmark_records(rows: Sequence[BenchmarkRow]) -> str:
    return "\n".join(row.record_line() for row in rows) + "\n"


def save_benchmark_figure(rows: Sequence[BenchmarkRow],
                          path: str | Path) -> Path:
    """Two panels: mean distortion per variant, and the error-class mix."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [row.variant for row in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.bar(names, [row.mean_distortion for row in rows], color="#4878d0")
    ax1.set_ylabel("mean distortion")
    ax1.set_ylim(0, 1)
    ax1.set_title("Round-trip distortion by variant")
    classes = [ErrorClass.MISSING, ErrorClass.FABRICATED,
               ErrorClass.MUTATED, ErrorClass.SYNTAX_INVALID]
    width = 0.8 / len(classes)
    for offset, cls in enumerate(classes):
        xs = [i + offset * width for i in range(len(rows))]
        ax2.bar(xs, [row.histogram[cls] for row in rows], width=width,
                label=cls.value)
    ax2.set_xticks([i + 1.5 * width for i in range(len(rows))])
    ax2.set_xticklabels(names)
    ax2.set_ylabel("count")
    ax2.set_title("Error classes")
    ax2.legend(fontsize="small")
    for ax in (ax1, ax2):
        ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# Serving-cost reports
# ---------------------------------------------------------------------------


_COST_HEADERS = ("policy", "requests", "total_load_ms", "peak_mem_mb",
                 "swap_count", "mean_wait_ms")


def cost_table(reports: Sequence[CostReport]) -> str:
    table = []
    for report in reports:
        waits = report.per_request_wait_ms
        mean_wait = sum(waits) / len(waits) if waits else 0.0
        table.append((report.policy, len(waits), report.total_load_ms,
                      report.peak_mem_mb, report.swap_count,
                      round(mean_wait, 3)))
    return format_table(_COST_HEADERS, table)


def cost_records(reports: Sequence[CostReport]) -> str:
    blocks = ["\n".join(report.record_lines()) for report in reports]
    return "\n\n".join(blocks) + "\n"


def save_cost_figure(reports: Sequence[CostReport], path: str | Path) -> Path:
    """Two panels: total load time and peak resident memory per policy."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [report.policy for report in reports]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.bar(names, [r.total_load_ms for r in reports], color="#4878d0")
    ax1.set_ylabel("total load (ms)")
    ax1.set_title("Load time by serving policy")
    ax2.bar(names, [r.peak_mem_mb for r in reports], color="#ee854a")
    ax2.set_ylabel("peak memory (MB)")
    ax2.set_title("Peak resident memory")
    for ax in (ax1, ax2):
        ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
