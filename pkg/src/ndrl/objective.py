"""Joint translation energies, margin objective, negative sampling, scoring.

The joint energy of a triple combines the structural distance d_g with three
description-based distances (d_ww, d_wg, d_gw); terms touching an absent
description are zero.  At scoring time a richness gate can drop the
description terms for triples whose endpoints are both structurally rich.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kg as kg_mod
from .errors import ConfigError, EntityLookupError, SamplingError, ShapeError
from .kg import KnowledgeGraph, RichnessConfig, Triple


@dataclass
class EnergyBreakdown:
    d_g: float
    d_ww: float
    d_wg: float
    d_gw: float
    d_w: float
    d: float


@dataclass(frozen=True)
class LossConfig:
    margin: float = 1.0
    negatives: int = 1
    l2: float = 1e-5

    def __post_init__(self):
        if self.margin <= 0:
            raise ConfigError(f"margin must be positive, got {self.margin}")
        if self.negatives < 1:
            raise ConfigError("need at least one negative per positive")
        if self.l2 < 0:
            raise ConfigError("l2 weight must be non-negative")


@dataclass(frozen=True)
class NegativeSample:
    triple: Triple
    side: str  # "head" | "tail" | "relation"


def _norm(u: np.ndarray) -> float:
    return float(np.sqrt(np.einsum("i,i->", u, u)))


def energy_joint(h_g, t_g, h_w, t_w, r) -> EnergyBreakdown:
    """Energy terms for one triple; pass None for an absent description."""
    h_g = np.asarray(h_g, dtype=np.float64)
    t_g = np.asarray(t_g, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    dims = {h_g.shape, t_g.shape, r.shape}
    if h_w is not None:
        h_w = np.asarray(h_w, dtype=np.float64)
        dims.add(h_w.shape)
    if t_w is not None:
        t_w = np.asarray(t_w, dtype=np.float64)
        dims.add(t_w.shape)
    if len(dims) != 1 or h_g.ndim != 1:
        raise ShapeError(f"energy operands disagree in shape: {sorted(dims)}")

    d_g = _norm(h_g + r - t_g)
    d_ww = _norm(h_w + r - t_w) if h_w is not None and t_w is not None else 0.0
    d_wg = _norm(h_w + r - t_g) if h_w is not None else 0.0
    d_gw = _norm(h_g + r - t_w) if t_w is not None else 0.0
    d_w = d_ww + d_wg + d_gw
    return EnergyBreakdown(d_g=d_g, d_ww=d_ww, d_wg=d_wg, d_gw=d_gw,
                           d_w=d_w, d=d_g + d_w)


def margin_loss(positive, negative, gamma: float) -> float:
    """Summed hinge max(gamma + d_pos - d_neg, 0) over matched energy pairs."""
    if gamma <= 0:
        raise ConfigError(f"margin must be positive, got {gamma}")
    pos = np.asarray(positive, dtype=np.float64)
    neg = np.asarray(negative, dtype=np.float64)
    if pos.shape != neg.shape:
        raise ShapeError("positive and negative energy lists differ in length")
    return float(np.maximum(gamma + pos - neg, 0.0).sum())


def sample_negatives(kg: KnowledgeGraph, positive: Triple, count: int,
                     rng: np.random.Generator,
                     corrupt_relation: bool = False) -> list[NegativeSample]:
    """Corrupt the head or the tail (fair coin), resampling until the corrupted
    triple differs from the positive.  With ``corrupt_relation`` a third,
    equally likely option replaces the relation instead.
    """
    if kg.n_entities < 2:
        raise SamplingError("cannot corrupt entities in a 1-entity graph")
    h, r, t = positive
    sides = 3 if corrupt_relation and kg.n_relations >= 2 else 2
    out: list[NegativeSample] = []
    for _ in range(count):
        side = int(rng.integers(0, sides))
        if side == 0:
            cand = int(rng.integers(0, kg.n_entities))
            while cand == h:
                cand = int(rng.integers(0, kg.n_entities))
            out.append(NegativeSample(Triple(cand, r, t), "head"))
        elif side == 1:
            cand = int(rng.integers(0, kg.n_entities))
            while cand == t:
                cand = int(rng.integers(0, kg.n_entities))
            out.append(NegativeSample(Triple(h, r, cand), "tail"))
        else:
            cand = int(rng.integers(0, kg.n_relations))
            while cand == r:
                cand = int(rng.integers(0, kg.n_relations))
            out.append(NegativeSample(Triple(h, cand, t), "relation"))
    return out


@dataclass
class ScoringState:
    """Precomputed representations a scorer needs: final entity and relation
    matrices, per-entity description vectors with a presence mask, and the
    per-entity richness verdict (None when the gate is disabled)."""

    entity_repr: np.ndarray
    relation_repr: np.ndarray
    desc_repr: np.ndarray | None
    desc_mask: np.ndarray | None
    rich: np.ndarray | None
    gate_enabled: bool

    @property
    def n_entities(self) -> int:
        return self.entity_repr.shape[0]


def _row_norms(u: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", u, u))


def _candidate_energies(state: ScoringState, relation: int, head, tail, cand):
    """(d_g, d) arrays over candidate entities for one side of a query."""
    e_repr = state.entity_repr
    r = state.relation_repr[relation]
    has_desc = state.desc_repr is not None
    if tail is None:  # candidates fill the tail slot
        fix_g = e_repr[head]
        cg = e_repr[cand]
        d_g = _row_norms(fix_g[None, :] + r[None, :] - cg)
        d = d_g.copy()
        if has_desc:
            cw = state.desc_repr[cand]
            cmask = state.desc_mask[cand]
            if state.desc_mask[head]:
                fw = state.desc_repr[head]
                d += _row_norms(fw[None, :] + r[None, :] - cw) * cmask
                d += _row_norms(fw[None, :] + r[None, :] - cg)
            d += _row_norms(fix_g[None, :] + r[None, :] - cw) * cmask
    else:  # candidates fill the head slot
        fix_g = e_repr[tail]
        cg = e_repr[cand]
        d_g = _row_norms(cg + r[None, :] - fix_g[None, :])
        d = d_g.copy()
        if has_desc:
            cw = state.desc_repr[cand]
            cmask = state.desc_mask[cand]
            if state.desc_mask[tail]:
                fw = state.desc_repr[tail]
                d += _row_norms(cw + r[None, :] - fw[None, :]) * cmask
                d += _row_norms(cg + r[None, :] - fw[None, :])
            d += _row_norms(cw + r[None, :] - fix_g[None, :]) * cmask
    return d_g, d


def score_candidates(state: ScoringState, relation: int, head: int | None = None,
                     tail: int | None = None, candidates=None) -> np.ndarray:
    """Scores (lower is better) for every candidate on the open side.

    Exactly one of head/tail must be given; the other side is enumerated.
    The richness gate, when enabled, scores a candidate pair by d_g alone
    when both endpoints are rich and by the joint energy otherwise.
    """
    if (head is None) == (tail is None):
        raise ConfigError("exactly one of head/tail must be fixed")
    cand = np.arange(state.n_entities) if candidates is None else np.asarray(candidates)
    d_g, d = _candidate_energies(state, relation, head, tail, cand)
    if state.gate_enabled:
        if state.rich is None:
            raise ConfigError("richness gate enabled but richness was not precomputed")
        fixed = head if tail is None else tail
        both_rich = state.rich[cand] & bool(state.rich[fixed])
        return np.where(both_rich, d_g, d)
    return d


def score_triple(state: ScoringState, kg: KnowledgeGraph, cfg: RichnessConfig,
                 triple: Triple) -> float:
    """Gated score of one triple: d_g when both endpoints reach the richness
    threshold (and the gate is enabled), the joint energy d otherwise."""
    h, r, t = triple
    kg._check_entity(h)
    kg._check_entity(t)
    if not 0 <= r < kg.n_relations:
        raise EntityLookupError(f"no relation with handle {r}")
    d_g, d = _candidate_energies(state, r, h, None, np.array([t]))
    if state.gate_enabled:
        rich_h = kg_mod.structure_richness(kg, h, cfg) >= cfg.threshold
        rich_t = kg_mod.structure_richness(kg, t, cfg) >= cfg.threshold
        if rich_h and rich_t:
            return float(d_g[0])
    return float(d[0])
