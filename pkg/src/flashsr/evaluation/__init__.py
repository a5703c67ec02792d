from .metrics import LSD_FLOOR, lsd, stft_distance
from .rtf import RtfResult, rtf_measure
from .harness import EvalRow, MetricReport, eval_suite, write_report

__all__ = [
    "lsd", "stft_distance", "LSD_FLOOR",
    "rtf_measure", "RtfResult",
    "eval_suite", "EvalRow", "MetricReport", "write_report",
]
