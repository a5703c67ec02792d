"""Real-time-factor measurement: wall-clock per second of generated audio."""

from __future__ import annotations

import dataclasses
import time


@dataclasses.dataclass(frozen=True)
class RtfResult:
    rtf: float
    clip_seconds: float
    times_s: tuple

    def __post_init__(self):
        if self.rtf <= 0:
            raise ValueError(f"rtf must be positive, got {self.rtf}")


def rtf_measure(runner, clip_seconds: float, repeats: int = 5) -> RtfResult:
    """Median wall-clock of ``runner()`` over ``repeats`` calls / clip length.

    One un-timed warm-up call precedes the measurements.
    """
    if clip_seconds <= 0:
        raise ValueError(f"clip_seconds must be positive, got {clip_seconds}")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    runner()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        runner()
        times.append(time.perf_counter() - t0)
    med = sorted(times)[len(times) // 2] if len(times) % 2 else (
        sum(sorted(times)[len(times) // 2 - 1: len(times) // 2 + 1]) / 2.0
    )
    return RtfResult(max(med, 1e-12) / clip_seconds, clip_seconds, tuple(times))
