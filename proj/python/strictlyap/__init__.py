"""Strict Lyapunov constructions for rapidly time-varying systems."""

from ._core import (
    Bundle,
    CertificateReport,
    ConstructedLyapunov,
    DivergenceError,
    QuadratureError,
    SamplePoint,
    __version__,
    artifact_version,
    custom_bundle_from_json,
    double_time_integral,
    list_bundles,
    load_custom_bundle,
    make_bundle,
    report_line,
    run_cli,
)

__all__ = [
    "Bundle",
    "CertificateReport",
    "ConstructedLyapunov",
    "DivergenceError",
    "QuadratureError",
    "SamplePoint",
    "__version__",
    "artifact_version",
    "custom_bundle_from_json",
    "double_time_integral",
    "list_bundles",
    "load_custom_bundle",
    "make_bundle",
    "report_line",
    "run_cli",
]
