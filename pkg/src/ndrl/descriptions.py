"""Description sentence vectors: file format, storage, attention aggregation.

Sentence-vector files start with ``#dim <D>``; every following data line is
``entity_label<TAB>sentence_index<TAB>v1,v2,...,vD`` with 0-based sentence
indexes contiguous per entity.  Entities may be absent entirely; the model
then drops their description energy terms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (
    ConfigError,
    FileFormatError,
    MissingDescriptionError,
    ShapeError,
)
from .gat import DEFAULT_SLOPE, KinkTracker, leaky_relu, _leaky_grad
from .kg import KnowledgeGraph

log = logging.getLogger(__name__)


@dataclass
class DescriptionBank:
    """Sentence vectors per entity handle: (n_sentences, dim) arrays."""

    dim: int
    vectors: dict[int, np.ndarray] = field(default_factory=dict)
    skipped_labels: int = 0

    def get(self, e: int) -> np.ndarray | None:
        return self.vectors.get(e)

    def entities(self) -> list[int]:
        return sorted(self.vectors)

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, e: int) -> bool:
        return e in self.vectors


class DescriptionRepr(NamedTuple):
    vector: np.ndarray | None
    present: bool


@dataclass
class DescAttentionParams:
    proj: np.ndarray    # (source_dim, out_dim): sentence vectors -> entity space
    attn_w: np.ndarray  # (out_dim, attn_dim): logit projection
    attn_z: np.ndarray  # (2 * attn_dim,)
    slope: float = DEFAULT_SLOPE

    def __post_init__(self):
        if self.proj.ndim != 2 or self.attn_w.ndim != 2:
            raise ShapeError("projection matrices must be 2-d")
        if self.attn_w.shape[0] != self.proj.shape[1]:
            raise ShapeError("attention projection must accept projected sentences")
        if self.attn_z.shape != (2 * self.attn_w.shape[1],):
            raise ShapeError(
                f"attention vector must have length {2 * self.attn_w.shape[1]}")
        if not 0 < self.slope < 1:
            raise ConfigError(f"leaky slope must lie in (0, 1), got {self.slope}")

    @property
    def source_dim(self) -> int:
        return int(self.proj.shape[0])

    @property
    def out_dim(self) -> int:
        return int(self.proj.shape[1])


def init_desc_params(rng: np.random.Generator, source_dim: int, out_dim: int,
                     attn_dim: int | None = None,
                     slope: float = DEFAULT_SLOPE) -> DescAttentionParams:
    from .transe import xavier_uniform

    attn_dim = out_dim if attn_dim is None else attn_dim
    return DescAttentionParams(
        proj=xavier_uniform(rng, source_dim, out_dim),
        attn_w=xavier_uniform(rng, out_dim, attn_dim),
        attn_z=xavier_uniform(rng, 2 * attn_dim, 1)[:, 0],
        slope=slope,
    )


def aggregate_description(h_struct: np.ndarray, sentences: np.ndarray,
                          params: DescAttentionParams, cache: dict | None = None,
                          kink: KinkTracker | None = None) -> np.ndarray:
    """Attention over projected sentence vectors, queried by the entity's
    structural representation.  Returns the weighted sum in entity space."""
    sentences = np.asarray(sentences, dtype=np.float64)
    if sentences.ndim != 2 or sentences.shape[0] == 0:
        raise MissingDescriptionError("entity has no sentence vectors")
    if sentences.shape[1] != params.source_dim:
        raise ShapeError(
            f"sentence dim {sentences.shape[1]} != projection dim {params.source_dim}")
    h_struct = np.asarray(h_struct, dtype=np.float64)
    if h_struct.shape != (params.out_dim,):
        raise ShapeError("structural vector does not match the projected space")

    attn_dim = params.attn_w.shape[1]
    s_proj = sentences @ params.proj
    a = h_struct @ params.attn_w
    b = s_proj @ params.attn_w
    pre = b @ params.attn_z[attn_dim:] + a @ params.attn_z[:attn_dim]
    if kink is not None:
        kink.add(pre)
    v = leaky_relu(pre, params.slope)
    v = v - v.max()
    ex = np.exp(v)
    alpha = ex / ex.sum()
    out = alpha @ s_proj
    if cache is not None:
        cache.update(sentences=sentences, s_proj=s_proj, a=a, b=b, pre=pre,
                     alpha=alpha, h_struct=h_struct)
    return out


def mean_description(sentences: np.ndarray, params: DescAttentionParams,
                     cache: dict | None = None) -> np.ndarray:
    """Plain average of projected sentence vectors (attention ablation)."""
    sentences = np.asarray(sentences, dtype=np.float64)
    if sentences.ndim != 2 or sentences.shape[0] == 0:
        raise MissingDescriptionError("entity has no sentence vectors")
    if sentences.shape[1] != params.source_dim:
        raise ShapeError(
            f"sentence dim {sentences.shape[1]} != projection dim {params.source_dim}")
    out = sentences.mean(axis=0) @ params.proj
    if cache is not None:
        cache.update(sentences=sentences)
    return out


def backward_attention(params: DescAttentionParams, cache: dict,
                       grad_out: np.ndarray):
    """Gradients of aggregate_description w.r.t. proj, attn_w, attn_z and the
    structural query vector."""
    attn_dim = params.attn_w.shape[1]
    za = params.attn_z[:attn_dim]
    zb = params.attn_z[attn_dim:]
    alpha, s_proj, pre = cache["alpha"], cache["s_proj"], cache["pre"]

    d_alpha = s_proj @ grad_out
    d_sproj = np.outer(alpha, grad_out)
    sdot = float(alpha @ d_alpha)
    dv = alpha * (d_alpha - sdot)
    d_pre = dv * _leaky_grad(pre, params.slope)

    dz = np.concatenate([d_pre.sum() * cache["a"], d_pre @ cache["b"]])
    da = d_pre.sum() * za
    db = np.outer(d_pre, zb)
    dw = np.outer(cache["h_struct"], da) + s_proj.T @ db
    dh = da @ params.attn_w.T
    d_sproj = d_sproj + db @ params.attn_w.T
    dproj = cache["sentences"].T @ d_sproj
    return dproj, dw, dz, dh


def backward_mean(params: DescAttentionParams, cache: dict,
                  grad_out: np.ndarray) -> np.ndarray:
    """Gradient of mean_description w.r.t. the projection matrix."""
    sentences = cache["sentences"]
    return np.outer(sentences.mean(axis=0), grad_out)


def entity_description(bank: DescriptionBank | None, e: int,
                       h_struct: np.ndarray, params: DescAttentionParams | None,
                       mode: str = "attention") -> DescriptionRepr:
    """Description vector for one entity, or an absent marker."""
    if bank is None or params is None:
        return DescriptionRepr(None, False)
    sentences = bank.get(e)
    if sentences is None or sentences.shape[0] == 0:
        return DescriptionRepr(None, False)
    if mode == "attention":
        return DescriptionRepr(aggregate_description(h_struct, sentences, params), True)
    if mode == "mean":
        return DescriptionRepr(mean_description(sentences, params), True)
    raise ConfigError(f"unknown description mode {mode!r}")


def read_sentence_vectors(path, kg: KnowledgeGraph) -> DescriptionBank:
    """Parse a sentence-vector file against the vocabulary of ``kg``.

    Rows naming labels outside the vocabulary are skipped (tallied in
    ``skipped_labels``); indexes must form 0..n-1 per entity.
    """
    path = Path(path)
    rows: dict[int, dict[int, np.ndarray]] = {}
    skipped: set[str] = set()
    dim = None
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if no == 1:
                parts = line.split()
                if len(parts) != 2 or parts[0] != "#dim":
                    raise FileFormatError("first line must be '#dim <D>'",
                                          path=path, line=no)
                try:
                    dim = int(parts[1])
                except ValueError:
                    raise FileFormatError(f"bad dimension {parts[1]!r}",
                                          path=path, line=no) from None
                if dim < 1:
                    raise FileFormatError("dimension must be positive",
                                          path=path, line=no)
                continue
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise FileFormatError(
                    "expected entity_label<TAB>sentence_index<TAB>values",
                    path=path, line=no)
            label, idx_s, values = fields
            try:
                idx = int(idx_s)
            except ValueError:
                raise FileFormatError(f"bad sentence index {idx_s!r}",
                                      path=path, line=no) from None
            if idx < 0:
                raise FileFormatError("sentence index must be >= 0",
                                      path=path, line=no)
            try:
                vec = np.array([float(x) for x in values.split(",")],
                               dtype=np.float64)
            except ValueError:
                raise FileFormatError("bad vector component",
                                      path=path, line=no) from None
            if vec.shape[0] != dim:
                raise FileFormatError(
                    f"vector has {vec.shape[0]} components, header says {dim}",
                    path=path, line=no)
            if label not in kg.entity_ids:
                skipped.add(label)
                continue
            ent = kg.entity_ids[label]
            per = rows.setdefault(ent, {})
            if idx in per:
                raise FileFormatError(
                    f"duplicate sentence index {idx} for {label!r}",
                    path=path, line=no)
            per[idx] = vec
    if dim is None:
        raise FileFormatError("empty file", path=path)
    bank = DescriptionBank(dim=dim, skipped_labels=len(skipped))
    for ent, per in rows.items():
        if sorted(per) != list(range(len(per))):
            raise FileFormatError(
                f"sentence indexes for {kg.entities[ent]!r} are not contiguous "
                f"from 0: {sorted(per)}", path=path)
        bank.vectors[ent] = np.stack([per[i] for i in range(len(per))])
    if skipped:
        log.warning("skipped %d unknown entity label(s) in %s", len(skipped), path)
    return bank


def write_sentence_vectors(path, kg: KnowledgeGraph, bank: DescriptionBank) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#dim {bank.dim}\n")
        for ent in bank.entities():
            label = kg.entities[ent]
            for idx, vec in enumerate(bank.vectors[ent]):
                body = ",".join(f"{x:.16e}" for x in vec)
                fh.write(f"{label}\t{idx}\t{body}\n")


def random_bank(kg: KnowledgeGraph, dim: int, coverage: float,
                max_sentences: int, seed: int) -> DescriptionBank:
    """Synthetic sentence vectors for a fraction of entities (testing aid)."""
    if not 0.0 <= coverage <= 1.0:
        raise ConfigError("coverage must lie in [0, 1]")
    if dim < 1 or max_sentences < 1:
        raise ConfigError("dim and max_sentences must be positive")
    rng = np.random.default_rng(seed)
    count = int(round(coverage * kg.n_entities))
    chosen = rng.permutation(kg.n_entities)[:count]
    bank = DescriptionBank(dim=dim)
    for e in sorted(int(x) for x in chosen):
        n_sent = int(rng.integers(1, max_sentences + 1))
        bank.vectors[e] = rng.normal(0.0, 1.0, size=(n_sent, dim))
    return bank
