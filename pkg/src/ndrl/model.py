"""Model assembly: the full parameter bundle and scoring-state construction.

The canonical parameter naming used across training, checkpoints and tests
comes from iter_params: embeddings.entities, embeddings.relations,
gat.layer{i}.head{k}.w / .z, gat.layer{i}.rel_w, gat.ent_w, and for the
description branch desc.proj, desc.attn_w, desc.attn_z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import descriptions as desc_mod
from . import kg as kg_mod
from .descriptions import DescAttentionParams, DescriptionBank, init_desc_params
from .errors import ConfigError, ShapeError
from .gat import DEFAULT_SLOPE, GatParams, encode_graph, init_gat_params
from .kg import KnowledgeGraph, RichnessConfig
from .objective import ScoringState
from .transe import EmbeddingTable, init_embeddings


@dataclass
class ModelParams:
    embeddings: EmbeddingTable
    gat: GatParams
    desc: DescAttentionParams | None = None

    def __post_init__(self):
        if self.gat.layers[0].in_dim != self.embeddings.dim:
            raise ShapeError(
                f"first layer expects dim {self.gat.layers[0].in_dim}, "
                f"embeddings have {self.embeddings.dim}")
        if self.desc is not None and self.desc.out_dim != self.gat.out_dim:
            raise ShapeError(
                f"description branch emits dim {self.desc.out_dim}, "
                f"encoder emits {self.gat.out_dim}")

    @property
    def out_dim(self) -> int:
        return self.gat.out_dim


def init_model_params(kg: KnowledgeGraph, rng: np.random.Generator,
                      dim: int = 100, heads: int = 2, layers: int = 2,
                      hidden_dim: int | None = None, out_dim: int | None = None,
                      slope: float = DEFAULT_SLOPE, rho: float = 0.5,
                      desc_source_dim: int | None = None,
                      desc_attn_dim: int | None = None,
                      embeddings: EmbeddingTable | None = None) -> ModelParams:
    """Fresh parameters; pass a pretrained table to keep its rows."""
    if dim < 1:
        raise ConfigError("dim must be positive")
    hidden_dim = max(dim // heads, 1) if hidden_dim in (None, 0) else hidden_dim
    out_dim = dim if out_dim in (None, 0) else out_dim
    if embeddings is None:
        embeddings = init_embeddings(kg, dim, rng)
    elif embeddings.dim != dim:
        raise ShapeError(f"pretrained table has dim {embeddings.dim}, expected {dim}")
    gat = init_gat_params(rng, in_dim=dim, hidden_dim=hidden_dim, out_dim=out_dim,
                          heads=heads, layers=layers, slope=slope, rho=rho)
    desc = None
    if desc_source_dim is not None:
        desc = init_desc_params(rng, desc_source_dim, out_dim,
                                attn_dim=desc_attn_dim, slope=slope)
    return ModelParams(embeddings=embeddings, gat=gat, desc=desc)


def iter_params(params: ModelParams):
    """(name, array) pairs in the canonical order; arrays are the live
    objects, so in-place updates reach the model."""
    yield "embeddings.entities", params.embeddings.entities
    yield "embeddings.relations", params.embeddings.relations
    for i, layer in enumerate(params.gat.layers):
        for k in range(layer.heads):
            yield f"gat.layer{i}.head{k}.w", layer.weights[k]
            yield f"gat.layer{i}.head{k}.z", layer.attn[k]
        yield f"gat.layer{i}.rel_w", params.gat.rel_transforms[i]
    yield "gat.ent_w", params.gat.ent_residual
    if params.desc is not None:
        yield "desc.proj", params.desc.proj
        yield "desc.attn_w", params.desc.attn_w
        yield "desc.attn_z", params.desc.attn_z


def param_dict(params: ModelParams) -> dict[str, np.ndarray]:
    return dict(iter_params(params))


def build_scoring_state(source, kg: KnowledgeGraph,
                        bank: DescriptionBank | None = None,
                        richness: RichnessConfig | None = None, *,
                        gate: bool = True, desc_mode: str = "attention",
                        include_inverse: bool = True) -> ScoringState:
    """Scoring state from either a plain embedding table or full model
    parameters.  With full parameters the graph is encoded and per-entity
    description vectors are aggregated; a plain table scores by its raw rows.
    """
    richness = RichnessConfig() if richness is None else richness
    if isinstance(source, EmbeddingTable):
        if bank is not None:
            raise ConfigError(
                "a plain embedding table cannot consume description vectors")
        entity_repr = source.entities
        relation_repr = source.relations
        desc_repr = desc_mask = None
    elif isinstance(source, ModelParams):
        encoded = encode_graph(kg, source.embeddings, source.gat,
                               include_inverse=include_inverse)
        entity_repr = encoded.entities
        relation_repr = encoded.relations
        desc_repr = desc_mask = None
        if bank is not None:
            if source.desc is None:
                raise ConfigError(
                    "description vectors given but the model has no description branch")
            desc_repr = np.zeros((kg.n_entities, source.out_dim))
            desc_mask = np.zeros(kg.n_entities, dtype=bool)
            for e in bank.entities():
                if desc_mode == "attention":
                    desc_repr[e] = desc_mod.aggregate_description(
                        entity_repr[e], bank.get(e), source.desc)
                elif desc_mode == "mean":
                    desc_repr[e] = desc_mod.mean_description(bank.get(e), source.desc)
                else:
                    raise ConfigError(f"unknown description mode {desc_mode!r}")
                desc_mask[e] = True
    else:
        raise ConfigError(
            f"cannot score from a {type(source).__name__}; "
            "pass an EmbeddingTable or ModelParams")
    rich = None
    if gate:
        values = np.array([kg_mod.structure_richness(kg, e, richness)
                           for e in range(kg.n_entities)])
        rich = values >= richness.threshold
    return ScoringState(entity_repr=entity_repr, relation_repr=relation_repr,
                        desc_repr=desc_repr, desc_mask=desc_mask, rich=rich,
                        gate_enabled=gate)
