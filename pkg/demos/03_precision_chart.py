#!/usr/bin/env python3
"""Reproduce the per-eye precision line chart for a pursuit session.

The error rises while the target moves fast (vision falling behind) and dips
as the target slows and reverses (vision catching up). Writes the chart CSV
and a self-contained SVG next to this script.
"""

from pathlib import Path

import numpy as np

from oculab import ExamConfig, TestKind, precision_series, preset, run_closed_loop
from oculab.charts import line_chart_svg
from oculab.metrics import precision_csv

cfg = ExamConfig(test_kind=TestKind.SMOOTH_PURSUIT, duration_s=12.0, seed=3)
output = run_closed_loop(cfg, preset("normal", seed=4))
series = precision_series(output.records)

out_dir = Path(__file__).parent
(out_dir / "precision.csv").write_text(precision_csv(series))
(out_dir / "precision.svg").write_text(
    line_chart_svg(
        list(series.t),
        {"left eye": list(series.left), "right eye": list(series.right)},
        "Focus precision over time (smooth pursuit)",
    )
)

speed = np.abs(np.gradient([r.target_yaw for r in output.records], series.t))
corr = np.corrcoef(series.left, speed)[0, 1]
print(f"wrote {out_dir / 'precision.csv'} and {out_dir / 'precision.svg'}")
print(f"left-eye error vs |target speed| correlation: {corr:.2f}")
print(f"RMS: left {series.rms_left:.2f} deg, right {series.rms_right:.2f} deg")
