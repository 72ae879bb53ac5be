"""Neural sequence tagger: embeddings, BiLSTM model, training, CRF head."""

from .embeddings import CharEncoder, EmbeddingTable, load_embeddings
from .model import (
    TaggerModel,
    TokenScoreMatrix,
    decode,
    dump_model_json,
    forward,
    init_model,
    load_model,
    load_model_json,
    predict_tagged_query,
    save_model,
    softmax_rows,
    validate_model,
)
from .training import (
    TrainingConfig,
    TrainResult,
    example_loss,
    gradient_check,
    train,
)

__all__ = [
    "CharEncoder",
    "EmbeddingTable",
    "load_embeddings",
    "TaggerModel",
    "TokenScoreMatrix",
    "decode",
    "dump_model_json",
    "forward",
    "init_model",
    "load_model",
    "load_model_json",
    "predict_tagged_query",
    "save_model",
    "softmax_rows",
    "validate_model",
    "TrainingConfig",
    "TrainResult",
    "example_loss",
    "gradient_check",
    "train",
]
