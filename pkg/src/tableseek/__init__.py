"""tableseek: answer list-intent and superlative web queries with tables.

The pipeline tags the query with its sought entity type, pulls candidate
tables from top-ranked documents, matches the extracted intent against
table structure, and selects (and snips) the best table answer.
"""

from .core import (
    EntityNameLexicon,
    Intent,
    Query,
    SuperlativeLexicon,
    TaggedQuery,
    TypeDictionary,
    cont,
    default_entity_name_lexicon,
    default_superlative_lexicon,
    default_type_dictionary,
    load_entity_name_lexicon,
    load_superlative_lexicon,
    load_type_dictionary,
    singularize,
    tokenize,
)
from .dict_tagger import (
    RejectionReason,
    RootCheckRule,
    entity_name_check,
    root_check,
    tdl_er_dp_tag,
    tdl_er_tag,
    tdl_tag,
)
from .features import FEATURE_NAMES, FeatureVector, IdfTable, featurize
from .selector import (
    SelectionResult,
    SelectorConfig,
    SelectorModel,
    score,
    select_answer,
    train_selector,
)
from .snippet import AnswerMode, Snippet, detect_answer_mode, generate_snippet
from .tables import (
    CandidatePool,
    DocumentContext,
    LocalCorpusSource,
    SearchSource,
    WebTable,
    candidate_pool,
    classify_relational,
    extract_tables,
    identify_subject_column,
)
from .train_data import LabeledExample, QueryLogEntry, generate, stratify

__version__ = "0.1.0"

__all__ = [
    "EntityNameLexicon",
    "Intent",
    "Query",
    "SuperlativeLexicon",
    "TaggedQuery",
    "TypeDictionary",
    "cont",
    "default_entity_name_lexicon",
    "default_superlative_lexicon",
    "default_type_dictionary",
    "load_entity_name_lexicon",
    "load_superlative_lexicon",
    "load_type_dictionary",
    "singularize",
    "tokenize",
    "RejectionReason",
    "RootCheckRule",
    "entity_name_check",
    "root_check",
    "tdl_er_dp_tag",
    "tdl_er_tag",
    "tdl_tag",
    "FEATURE_NAMES",
    "FeatureVector",
    "IdfTable",
    "featurize",
    "SelectionResult",
    "SelectorConfig",
    "SelectorModel",
    "score",
    "select_answer",
    "train_selector",
    "AnswerMode",
    "Snippet",
    "detect_answer_mode",
    "generate_snippet",
    "CandidatePool",
    "DocumentContext",
    "LocalCorpusSource",
    "SearchSource",
    "WebTable",
    "candidate_pool",
    "classify_relational",
    "extract_tables",
    "identify_subject_column",
    "LabeledExample",
    "QueryLogEntry",
    "generate",
    "stratify",
    "__version__",
]
