"""Reference-free MT evaluation with cross-lingual embeddings."""

from ._core import (
    EmbeddingSpace,
    EvaluationRecord,
    InvalidArgument,
    IoError,
    Metric,
    NgramLm,
    ParseError,
    SegmentScore,
    TransformPipeline,
    UnscorableError,
    W2wResult,
    XmoverError,
    alignment_residual,
    compute_idf,
    fit_pipeline,
    kendall,
    pearson,
    point_cloud_distance,
    read_dataset,
    solve_wmd,
    tokenize,
    train_lm,
)

__all__ = [
    "EmbeddingSpace",
    "EvaluationRecord",
    "InvalidArgument",
    "IoError",
    "Metric",
    "NgramLm",
    "ParseError",
    "SegmentScore",
    "TransformPipeline",
    "UnscorableError",
    "W2wResult",
    "XmoverError",
    "alignment_residual",
    "compute_idf",
    "fit_pipeline",
    "kendall",
    "pearson",
    "point_cloud_distance",
    "read_dataset",
    "solve_wmd",
    "tokenize",
    "train_lm",
]
