"""Knowledge-graph embeddings that mix three signals: relation-aware graph
attention over an entity's neighborhood, attention-pooled description
sentence vectors, and a translation objective tying them together.  Scoring
can drop the description terms for entities whose graph structure is rich
enough to stand on its own.
"""

from .checkpoint import (Checkpoint, load_any, load_checkpoint, load_embeddings,
                         save_checkpoint, save_embeddings)
from .descriptions import (DescAttentionParams, DescriptionBank,
                           aggregate_description, mean_description, random_bank,
                           read_sentence_vectors, write_sentence_vectors)
from .errors import (CheckpointFormatError, ConfigError, EmptyGraphError,
                     EmptyNeighborhoodError, EntityLookupError, FileFormatError,
                     MissingDescriptionError, NdrlError, SamplingError,
                     ShapeError, TrainingDiverged, TripleFormatError)
from .evaluator import EvalReport, average_rank, evaluate, ranks_to_metrics
from .gat import (EdgeIndex, GatLayerParams, GatParams, GatOutput, build_edges,
                  encode_graph, init_gat_params)
from .kg import (DatasetSplit, KnowledgeGraph, Neighbor, RichnessConfig, Triple,
                 generate_synthetic, load_split, load_triples, neighborhood,
                 save_split, save_triples, split_dataset, structure_richness)
from .model import ModelParams, build_scoring_state, init_model_params, iter_params
from .objective import (EnergyBreakdown, LossConfig, NegativeSample, ScoringState,
                        energy_joint, margin_loss, sample_negatives,
                        score_candidates, score_triple)
from .orc import OrcReport, scan
from .trainer import TrainConfig, check_gradients, gradient_errors, train
from .transe import (EmbeddingTable, TransEConfig, init_embeddings,
                     pretrain_embeddings, transe_energy, xavier_uniform)

__version__ = "1.0.0"

__all__ = [
    "Checkpoint", "load_any", "load_checkpoint", "load_embeddings",
    "save_checkpoint", "save_embeddings",
    "DescAttentionParams", "DescriptionBank", "aggregate_description",
    "mean_description", "random_bank", "read_sentence_vectors",
    "write_sentence_vectors",
    "CheckpointFormatError", "ConfigError", "EmptyGraphError",
    "EmptyNeighborhoodError", "EntityLookupError", "FileFormatError",
    "MissingDescriptionError", "NdrlError", "SamplingError", "ShapeError",
    "TrainingDiverged", "TripleFormatError",
    "EvalReport", "average_rank", "evaluate", "ranks_to_metrics",
    "EdgeIndex", "GatLayerParams", "GatParams", "GatOutput", "build_edges",
    "encode_graph", "init_gat_params",
    "DatasetSplit", "KnowledgeGraph", "Neighbor", "RichnessConfig", "Triple",
    "generate_synthetic", "load_split", "load_triples", "neighborhood",
    "save_split", "save_triples", "split_dataset", "structure_richness",
    "ModelParams", "build_scoring_state", "init_model_params", "iter_params",
    "EnergyBreakdown", "LossConfig", "NegativeSample", "ScoringState",
    "energy_joint", "margin_loss", "sample_negatives", "score_candidates",
    "score_triple",
    "OrcReport", "scan",
    "TrainConfig", "check_gradients", "gradient_errors", "train",
    "EmbeddingTable", "TransEConfig", "init_embeddings", "pretrain_embeddings",
    "transe_energy", "xavier_uniform",
]
