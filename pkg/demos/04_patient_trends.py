#!/usr/bin/env python3
"""Per-patient session logging and cross-session trends.

Simulates a patient whose saccade latency improves over three visits, saves
each session, then queries how the metric trended.
"""

import tempfile

from oculab import ExamConfig, RecordsStore, RunRequest, TestKind, execute_run
from oculab.subject import preset

with tempfile.TemporaryDirectory() as root:
    store = RecordsStore(root)
    patient = store.create_patient("A. Student")
    print(f"patient {patient.id} ({patient.display_name})")

    for day, latency in enumerate((0.30, 0.25, 0.22), start=1):
        request = RunRequest(
            patient_id=patient.id,
            config=ExamConfig(test_kind=TestKind.SACCADE_LATENCY, duration_s=40.0, seed=day),
            subject=preset("normal", seed=day,
                           saccade_latency_mean_s=latency, saccade_latency_sd_s=0.005),
            started_at=f"2026-04-0{day}T09:00:00.000+00:00",
        )
        record = execute_run(request, store)
        print(f"  visit {day}: session {record.session_id} "
              f"latency mean {record.report.latency_mean_s:.3f} s")

    print("\ntrend(latency_mean_s):")
    for started_at, value in store.trend(patient.id, "latency_mean_s"):
        print(f"  {started_at}  {value:.3f} s")
