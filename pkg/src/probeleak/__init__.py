"""probeleak: simulator and analysis toolkit for sequential probe
side-channels on hidden single-qubit gate sequences."""

from .analysis import (
    BlindSpotScan,
    ClassMeans,
    EnvelopeCurve,
    blind_spot_scan,
    class_means,
    envelope,
    gray_reorder,
    js,
    kl,
    pairwise_separation,
    theta_star,
    tv,
    wht,
)
from .decode import (
    AccuracyReport,
    DecodeResult,
    LawTable,
    evaluate_accuracy,
    law_table,
    ml_decode,
    per_position_decode,
    wilson_interval,
)
from .errors import CapacityError, InputError, InternalConsistencyError, ProbeleakError
from .laws import (
    GateSequence,
    ObservationLaw,
    ShotHistogram,
    StepOrder,
    empirical_dist,
    exact_law,
    exact_law_joint,
    sample_histogram,
)
from .qcore import (
    GateLabel,
    KrausPair,
    QubitState,
    conjugate_probe,
    crx,
    depolarize,
    instrument_kraus,
    joint_step_oracle,
    rx,
)
from .render import RenderSpec, render_heatmap
from .sweep import CellResult, SweepConfig, ridge_extract, run_sweep, run_sweep_to_files

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport", "BlindSpotScan", "CapacityError", "CellResult", "ClassMeans",
    "DecodeResult", "EnvelopeCurve", "GateLabel", "GateSequence", "InputError",
    "InternalConsistencyError", "KrausPair", "LawTable", "ObservationLaw",
    "ProbeleakError", "QubitState", "RenderSpec", "ShotHistogram", "StepOrder",
    "SweepConfig", "blind_spot_scan", "class_means", "conjugate_probe", "crx",
    "depolarize", "empirical_dist", "envelope", "evaluate_accuracy", "exact_law",
    "exact_law_joint", "gray_reorder", "instrument_kraus", "joint_step_oracle",
    "js", "kl", "law_table", "ml_decode", "pairwise_separation",
    "per_position_decode", "render_heatmap", "ridge_extract", "run_sweep",
    "run_sweep_to_files", "rx", "sample_histogram", "theta_star", "tv",
    "wht", "wilson_interval",
]
