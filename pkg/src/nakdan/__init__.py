"""Hebrew diacritization engine.

Pipeline: morphological disambiguation constrained by a wide-coverage
lexicon, then ranking of full diacritic sequences, with constrained beam
search for words the lexicon does not know.
"""

__version__ = "0.1.0"

from .hebrew import (
    DiacriticMark,
    DiacritizedLetter,
    DiacritizedWord,
    MATRES_KEEP,
    MATRES_REMOVE,
    ShinDotSide,
    Vowel,
    bare_letters,
    normalize_text,
    parse_word,
    render,
    strip_diacritics,
    to_lexicon_string,
    tokenize,
)
from .lexicon import (
    Candidate,
    Lexicon,
    LexiconEntry,
    LexiconError,
    MorphAnalysis,
    QuoteIndex,
    Verse,
    load_annotated_corpus,
    load_collocations,
    load_lexicon,
    load_wordset,
    match_biblical_quotes,
    save_lexicon,
)
from .tagger import Tagger, TaggerConfig
from .diacritizer import LABELS, Diacritizer, DiacritizerConfig, valid_labels
from .pipeline import (
    Alternative,
    AnnotatedDocument,
    AnnotatedWord,
    EvalError,
    EvalReport,
    Pipeline,
    PipelineError,
    document_from_dict,
    document_to_dict,
    evaluate,
    expected_random_accuracy,
    export_html,
    export_plain,
    select_alternative,
    train_models,
)
from .server import build_app, create_app

__all__ = [
    "Alternative",
    "AnnotatedDocument",
    "AnnotatedWord",
    "Candidate",
    "DiacriticMark",
    "DiacritizedLetter",
    "DiacritizedWord",
    "Diacritizer",
    "DiacritizerConfig",
    "EvalError",
    "EvalReport",
    "LABELS",
    "Lexicon",
    "LexiconEntry",
    "LexiconError",
    "MATRES_KEEP",
    "MATRES_REMOVE",
    "MorphAnalysis",
    "Pipeline",
    "PipelineError",
    "QuoteIndex",
    "ShinDotSide",
    "Tagger",
    "TaggerConfig",
    "Verse",
    "Vowel",
    "bare_letters",
    "build_app",
    "create_app",
    "document_from_dict",
    "document_to_dict",
    "evaluate",
    "expected_random_accuracy",
    "export_html",
    "export_plain",
    "load_annotated_corpus",
    "load_collocations",
    "load_lexicon",
    "load_wordset",
    "match_biblical_quotes",
    "normalize_text",
    "parse_word",
    "render",
    "save_lexicon",
    "select_alternative",
    "strip_diacritics",
    "to_lexicon_string",
    "tokenize",
    "train_models",
    "valid_labels",
    "__version__",
]
