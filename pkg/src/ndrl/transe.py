"""Translation-based pre-training of the initial embedding tables.

Entity and relation tables start from Xavier-uniform draws and are trained
with the margin objective over corrupted triples; entity rows are projected
back to unit L2 norm after every epoch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, ShapeError
from .kg import KnowledgeGraph, Triple
from .objective import sample_negatives

EpochHook = Callable[[int, float], None]


@dataclass
class EmbeddingTable:
    entities: np.ndarray  # (n_entities, dim) float64
    relations: np.ndarray  # (n_relations, dim) float64

    def __post_init__(self):
        self.entities = np.asarray(self.entities, dtype=np.float64)
        self.relations = np.asarray(self.relations, dtype=np.float64)
        if self.entities.ndim != 2 or self.relations.ndim != 2:
            raise ShapeError("embedding tables must be 2-d")
        if self.entities.shape[1] != self.relations.shape[1]:
            raise ShapeError("entity and relation tables disagree in dimension")
        if not (np.isfinite(self.entities).all() and np.isfinite(self.relations).all()):
            raise ConfigError("embedding tables contain non-finite values")

    @property
    def dim(self) -> int:
        return int(self.entities.shape[1])

    def copy(self) -> "EmbeddingTable":
        return EmbeddingTable(self.entities.copy(), self.relations.copy())


@dataclass(frozen=True)
class TransEConfig:
    margin: float = 1.0
    lr: float = 0.01
    epochs: int = 500
    seed: int = 0
    batch_size: int = 128
    negatives: int = 1

    def __post_init__(self):
        if self.margin <= 0:
            raise ConfigError(f"margin must be positive, got {self.margin}")
        if self.lr < 0:
            raise ConfigError(f"learning rate must be non-negative, got {self.lr}")
        if self.epochs < 0:
            raise ConfigError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ConfigError("batch size must be at least 1")
        if self.negatives < 1:
            raise ConfigError("need at least one negative per positive")


def xavier_uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def transe_energy(h, r, t) -> float:
    """Translation energy ||h + r - t||_2."""
    h = np.asarray(h, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if not h.shape == r.shape == t.shape or h.ndim != 1:
        raise ShapeError(f"operands disagree in shape: {h.shape}, {r.shape}, {t.shape}")
    u = h + r - t
    return float(np.sqrt(np.einsum("i,i->", u, u)))


def init_embeddings(kg: KnowledgeGraph, dim: int, rng: np.random.Generator) -> EmbeddingTable:
    if dim < 1:
        raise ConfigError("embedding dimension must be positive")
    return EmbeddingTable(
        entities=xavier_uniform(rng, kg.n_entities, dim),
        relations=xavier_uniform(rng, kg.n_relations, dim),
    )


def pretrain_embeddings(kg: KnowledgeGraph, cfg: TransEConfig, dim: int,
                        triples: Sequence[Triple] | None = None,
                        on_epoch: EpochHook | None = None) -> EmbeddingTable:
    """Margin-trained translation embeddings over ``triples`` (defaults to the
    whole graph).  ``on_epoch(epoch, loss)`` reports the summed hinge loss
    accumulated during each epoch.
    """
    rng = np.random.default_rng(cfg.seed)
    table = init_embeddings(kg, dim, rng)
    ent, rel = table.entities, table.relations
    pool = list(kg.triples if triples is None else triples)
    if not pool:
        raise ConfigError("cannot pretrain on an empty triple list")
    n = len(pool)

    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, cfg.batch_size):
            batch = [pool[i] for i in perm[lo:lo + cfg.batch_size]]
            pos = np.array(batch, dtype=np.int64)
            negs = []
            for tri in batch:
                negs.extend(s.triple for s in
                            sample_negatives(kg, tri, cfg.negatives, rng))
            neg = np.array(negs, dtype=np.int64)
            rep = cfg.negatives

            ph, pr, pt = pos[:, 0], pos[:, 1], pos[:, 2]
            nh, nr, nt = neg[:, 0], neg[:, 1], neg[:, 2]
            du = ent[ph] + rel[pr] - ent[pt]
            dn = ent[nh] + rel[nr] - ent[nt]
            d_pos = np.sqrt(np.einsum("ij,ij->i", du, du))
            d_neg = np.sqrt(np.einsum("ij,ij->i", dn, dn))
            hinge = cfg.margin + np.repeat(d_pos, rep) - d_neg
            active = hinge > 0
            epoch_loss += float(hinge[active].sum())
            if not active.any():
                continue

            # subgradients: unit vectors of the translation residuals
            eps = 1e-12
            gu = du / np.maximum(d_pos, eps)[:, None]
            gn = dn / np.maximum(d_neg, eps)[:, None]
            act_n = active.astype(np.float64)
            act_p = act_n.reshape(-1, rep).sum(axis=1)

            grad_e = np.zeros_like(ent)
            grad_r = np.zeros_like(rel)
            np.add.at(grad_e, ph, gu * act_p[:, None])
            np.add.at(grad_e, pt, -gu * act_p[:, None])
            np.add.at(grad_r, pr, gu * act_p[:, None])
            np.add.at(grad_e, nh, -gn * act_n[:, None])
            np.add.at(grad_e, nt, gn * act_n[:, None])
            np.add.at(grad_r, nr, -gn * act_n[:, None])

            ent -= cfg.lr * grad_e
            rel -= cfg.lr * grad_r

        norms = np.sqrt(np.einsum("ij,ij->i", ent, ent))
        ent /= np.maximum(norms, 1e-12)[:, None]
        if on_epoch is not None:
            on_epoch(epoch, epoch_loss)

    return table
