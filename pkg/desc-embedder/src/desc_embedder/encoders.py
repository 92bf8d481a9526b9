"""Sentence encoders behind one tiny interface.

``hash``: deterministic pseudo-vectors derived from the sentence text, for
offline pipelines and tests.  ``transformer``: any local/cached masked-LM
from the transformers library, mean or CLS pooled.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import ModelUnavailableError

DEFAULT_MODEL = "hfl/chinese-bert-wwm-ext"


class HashEncoder:
    """Unit-norm vector seeded by a stable digest of the sentence.

    The same sentence maps to the same vector on every platform and run, so
    downstream files are reproducible without any model weights.
    """

    def __init__(self, dim: int = 32):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = dim

    def encode(self, sentences: list[str]) -> np.ndarray:
        out = np.empty((len(sentences), self.dim), dtype=np.float64)
        for i, sentence in enumerate(sentences):
            digest = hashlib.blake2b(sentence.encode("utf-8"),
                                     digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "big"))
            vec = rng.standard_normal(self.dim)
            out[i] = vec / np.linalg.norm(vec)
        return out


class TransformerEncoder:
    """Pooled hidden states of a cached masked-LM checkpoint."""

    def __init__(self, model_id: str = DEFAULT_MODEL, pooling: str = "mean"):
        if pooling not in ("mean", "cls"):
            raise ValueError(f"pooling must be 'mean' or 'cls', got {pooling!r}")
        self.pooling = pooling
        self.model_id = model_id
        instruction = (
            f"download it first:\n"
            f"  python3 -c \"from transformers import AutoModel, AutoTokenizer; "
            f"AutoModel.from_pretrained('{model_id}'); "
            f"AutoTokenizer.from_pretrained('{model_id}')\"")
        try:
            import torch  # noqa: F401
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ModelUnavailableError(
                f"transformers/torch not installed ({exc}); "
                f"pip install desc-embedder[transformer]", instruction) from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(
                model_id, local_files_only=True)
            self.model = AutoModel.from_pretrained(
                model_id, local_files_only=True)
        except OSError as exc:
            raise ModelUnavailableError(
                f"model {model_id!r} is not in the local cache", instruction
            ) from exc
        self.model.eval()
        self.dim = int(self.model.config.hidden_size)

    def encode(self, sentences: list[str]) -> np.ndarray:
        import torch

        with torch.no_grad():
            batch = self.tokenizer(sentences, padding=True, truncation=True,
                                   return_tensors="pt")
            hidden = self.model(**batch).last_hidden_state
            if self.pooling == "cls":
                pooled = hidden[:, 0, :]
            else:
                mask = batch["attention_mask"].unsqueeze(-1).to(hidden.dtype)
                pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1)
        return pooled.to(torch.float64).cpu().numpy()


def get_encoder(backend: str, model_id: str = DEFAULT_MODEL,
                pooling: str = "mean", dim: int = 32):
    if backend == "hash":
        return HashEncoder(dim=dim)
    if backend == "transformer":
        return TransformerEncoder(model_id=model_id, pooling=pooling)
    raise ValueError(f"unknown encoder backend {backend!r}")
