"""Neighborhood collaborative filtering for student grade prediction.

Predicts the grade a student would earn in an untaken course from the
grades of similar students (Pearson-correlated) or from the student's own
grades in similar courses (adjusted cosine), ranks electives by predicted
grade, and evaluates both algorithms with a held-out-term MAE protocol.
"""

from .data import (
    CSV_HEADER,
    DEFAULT_GRADE_POINTS,
    GradeRecord,
    GradeScale,
    RatingsMatrix,
    ingest_records,
    load_ratings_csv,
    load_scale_csv,
    write_records_csv,
)
from .errors import (
    DegenerateMatrix,
    DestinationUnwritable,
    DuplicateRecord,
    EmptyPairList,
    EmptyReport,
    FingerprintMismatch,
    GradeLensError,
    InconsistentCourseTerm,
    InsufficientStudents,
    InvalidScale,
    MalformedRow,
    SelfSimilarityRequested,
    UnknownCourse,
    UnknownDataset,
    UnknownGradeSymbol,
    UnknownModel,
    UnknownStudent,
    UnknownTerm,
)
from .evaluation import (
    EvaluationReport,
    ExperimentConfig,
    ReportRow,
    SplitSpec,
    emit_report,
    global_mean_baseline,
    mae,
    report_to_csv_lines,
    run_experiment,
    split_held_out_students,
    synthesize_dataset,
)
from .predict import (
    ALGORITHMS,
    ITEM_BASED,
    USER_BASED,
    NeighborhoodConfig,
    Prediction,
    predict,
    predict_item_based,
    predict_user_based,
    recommend_top_n,
    select_item_neighbors,
    select_user_neighbors,
    whatif_item_predictions,
    whatif_user_predictions,
)
from .similarity import (
    ITEM_ITEM,
    USER_USER,
    SimilarityModel,
    WeightingParams,
    adjusted_cosine_item_similarity,
    apply_case_amplification,
    apply_significance_weighting,
    apply_weighting,
    build_similarity_model,
    load_model,
    model_from_payload,
    model_to_payload,
    pearson_user_similarity,
    save_model,
)
from .store import Store, StoredModelHandle, default_data_dir

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "CSV_HEADER",
    "DEFAULT_GRADE_POINTS",
    "DegenerateMatrix",
    "DestinationUnwritable",
    "DuplicateRecord",
    "EmptyPairList",
    "EmptyReport",
    "EvaluationReport",
    "ExperimentConfig",
    "FingerprintMismatch",
    "GradeLensError",
    "GradeRecord",
    "GradeScale",
    "InconsistentCourseTerm",
    "InsufficientStudents",
    "InvalidScale",
    "ITEM_BASED",
    "ITEM_ITEM",
    "MalformedRow",
    "NeighborhoodConfig",
    "Prediction",
    "RatingsMatrix",
    "ReportRow",
    "SelfSimilarityRequested",
    "SimilarityModel",
    "SplitSpec",
    "Store",
    "StoredModelHandle",
    "UnknownCourse",
    "UnknownDataset",
    "UnknownGradeSymbol",
    "UnknownModel",
    "UnknownStudent",
    "UnknownTerm",
    "USER_BASED",
    "USER_USER",
    "WeightingParams",
    "adjusted_cosine_item_similarity",
    "apply_case_amplification",
    "apply_significance_weighting",
    "apply_weighting",
    "build_similarity_model",
    "default_data_dir",
    "emit_report",
    "global_mean_baseline",
    "ingest_records",
    "load_model",
    "load_ratings_csv",
    "load_scale_csv",
    "mae",
    "model_from_payload",
    "model_to_payload",
    "pearson_user_similarity",
    "predict",
    "predict_item_based",
    "predict_user_based",
    "recommend_top_n",
    "report_to_csv_lines",
    "run_experiment",
    "save_model",
    "select_item_neighbors",
    "select_user_neighbors",
    "split_held_out_students",
    "synthesize_dataset",
    "whatif_item_predictions",
    "whatif_user_predictions",
    "write_records_csv",
]
