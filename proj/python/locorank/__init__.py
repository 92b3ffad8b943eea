"""Ability-based ranking of VR locomotion techniques.

Thin wrapper over the _locorank extension; see the README for the telemetry
and questionnaire formats the functions expect.
"""

try:
    from ._locorank import *  # noqa: F401,F403  (installed package layout)
    from ._locorank import __doc__ as _ext_doc  # noqa: F401
except ImportError:  # pragma: no cover - build-tree layout
    from _locorank import *  # noqa: F401,F403

__all__ = [
    "version",
    "metric_names",
    "validate_session_text",
    "metrics_csv",
    "quickdash_score",
    "build_dataset",
    "fit_elastic_net",
    "forest_fit_predict",
    "group_kfold",
    "run",
    "synth_cohort",
    "render_report",
    "LocorankError",
]
