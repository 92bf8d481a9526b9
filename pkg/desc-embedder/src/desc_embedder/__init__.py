"""Offline converter from entity description text to sentence-vector files."""

from .embed import (DescriptionRecord, embed_file, embed_records,
                    read_description_records)
from .encoders import (DEFAULT_MODEL, HashEncoder, TransformerEncoder,
                       get_encoder)
from .errors import DescEmbedderError, InputFormatError, ModelUnavailableError
from .segment import split_sentences

__version__ = "1.0.0"

__all__ = [
    "DEFAULT_MODEL",
    "DescEmbedderError",
    "DescriptionRecord",
    "HashEncoder",
    "InputFormatError",
    "ModelUnavailableError",
    "TransformerEncoder",
    "embed_file",
    "embed_records",
    "get_encoder",
    "read_description_records",
    "split_sentences",
]
