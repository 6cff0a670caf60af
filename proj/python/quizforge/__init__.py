from ._core import (
    IoError,
    QuizforgeError,
    ValidationError,
    __version__,
    aggregate_ratings,
    clean_text,
    finetune_config,
    format_quiz,
    mcq_to_saq,
    normalize_tr,
    parse_quiz,
    quality_gate,
    rouge,
    rouge_l,
    rouge_n,
    run_cli,
    split,
)

__all__ = [
    "IoError",
    "QuizforgeError",
    "ValidationError",
    "__version__",
    "aggregate_ratings",
    "clean_text",
    "finetune_config",
    "format_quiz",
    "mcq_to_saq",
    "normalize_tr",
    "parse_quiz",
    "quality_gate",
    "rouge",
    "rouge_l",
    "rouge_n",
    "run_cli",
    "split",
]
