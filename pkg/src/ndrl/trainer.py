"""Joint margin training of the full model, plus a finite-difference
gradient audit over the exact batch loss the trainer optimizes.

One code path computes the batch loss for both uses: train() asks it for
analytic gradients, the audit re-evaluates it under elementwise parameter
nudges.  Nonsmooth points (hinge, norms, leaky units) are tracked so the
audit can skip elements whose finite-difference step straddles a kink.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import descriptions as desc_mod
from . import kg as kg_mod
from . import objective
from .checkpoint import Checkpoint
from .descriptions import DescriptionBank, backward_attention, backward_mean, random_bank
from .errors import ConfigError, TrainingDiverged
from .gat import (DEFAULT_SLOPE, EdgeIndex, KinkTracker, backward_cached,
                  build_edges, forward_cached)
from .kg import KnowledgeGraph, RichnessConfig, Triple, generate_synthetic
from .model import ModelParams, init_model_params, iter_params
from .transe import EmbeddingTable, TransEConfig, pretrain_embeddings

log = logging.getLogger(__name__)

EpochHook = Callable[[int, float], None]


def _parse_bool(value: str, key: str) -> bool:
    low = value.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {value!r}")


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 100
    heads: int = 2
    layers: int = 2
    hidden_dim: int = 0         # 0: dim // heads
    out_dim: int = 0            # 0: dim
    rho: float = 0.5
    slope: float = DEFAULT_SLOPE
    include_inverse: bool = True
    lr: float = 0.004
    batch: int = 512
    epochs: int = 100
    margin: float = 1.0
    l2: float = 1e-5
    negatives: int = 1
    seed: int = 11
    gate_in_training: bool = False
    corrupt_relation: bool = False
    use_relation_in_neighbors: bool = True
    desc_mode: str = "attention"
    richness_gate: bool = True
    richness: RichnessConfig = RichnessConfig()
    transe_lr: float = 0.01
    transe_margin: float = 1.0
    transe_epochs: int = 500
    transe_batch: int = 128
    transe_seed: int = 7

    def __post_init__(self):
        if self.dim < 1 or self.heads < 1 or self.layers < 1:
            raise ConfigError("dim, heads and layers must be positive")
        if self.hidden_dim < 0 or self.out_dim < 0:
            raise ConfigError("hidden_dim and out_dim cannot be negative")
        if self.lr < 0:
            raise ConfigError(f"learning rate cannot be negative, got {self.lr}")
        if self.margin <= 0:
            raise ConfigError(f"margin must be positive, got {self.margin}")
        if self.l2 < 0:
            raise ConfigError("l2 strength cannot be negative")
        if self.batch < 1 or self.negatives < 1:
            raise ConfigError("batch and negatives must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs cannot be negative")
        if not 0 < self.rho <= 1:
            raise ConfigError(f"rho must lie in (0, 1], got {self.rho}")
        if self.desc_mode not in ("attention", "mean"):
            raise ConfigError(
                f"desc_mode must be 'attention' or 'mean', got {self.desc_mode!r}")

    @property
    def effective_rho(self) -> float:
        """Relations are pulled out of the neighbor mix by forcing rho to 1."""
        return self.rho if self.use_relation_in_neighbors else 1.0

    @property
    def effective_hidden(self) -> int:
        return self.hidden_dim if self.hidden_dim else max(self.dim // self.heads, 1)

    @property
    def effective_out(self) -> int:
        return self.out_dim if self.out_dim else self.dim

    def to_flat(self) -> dict[str, str]:
        on = lambda v: "true" if v else "false"
        return {
            "model.dim": str(self.dim),
            "model.heads": str(self.heads),
            "model.layers": str(self.layers),
            "model.hidden_dim": str(self.hidden_dim),
            "model.out_dim": str(self.out_dim),
            "model.rho": repr(self.rho),
            "model.slope": repr(self.slope),
            "model.include_inverse": on(self.include_inverse),
            "train.lr": repr(self.lr),
            "train.batch": str(self.batch),
            "train.epochs": str(self.epochs),
            "train.margin": repr(self.margin),
            "train.l2": repr(self.l2),
            "train.negatives": str(self.negatives),
            "train.seed": str(self.seed),
            "train.gate_in_training": on(self.gate_in_training),
            "train.corrupt_relation": on(self.corrupt_relation),
            "richness.k": repr(self.richness.k),
            "richness.threshold": repr(self.richness.threshold),
            "ablation.use_relation": on(self.use_relation_in_neighbors),
            "ablation.desc_mode": self.desc_mode,
            "ablation.richness_gate": on(self.richness_gate),
            "transe.lr": repr(self.transe_lr),
            "transe.margin": repr(self.transe_margin),
            "transe.epochs": str(self.transe_epochs),
            "transe.batch": str(self.transe_batch),
            "transe.seed": str(self.transe_seed),
        }

    @classmethod
    def from_flat(cls, flat: dict[str, str]) -> "TrainConfig":
        base = cls()

        def geti(key, dflt):
            try:
                return int(flat[key]) if key in flat else dflt
            except ValueError:
                raise ConfigError(f"{key} must be an integer, "
                                  f"got {flat[key]!r}") from None

        def getf(key, dflt):
            try:
                return float(flat[key]) if key in flat else dflt
            except ValueError:
                raise ConfigError(f"{key} must be a number, "
                                  f"got {flat[key]!r}") from None

        def getb(key, dflt):
            return _parse_bool(flat[key], key) if key in flat else dflt

        return cls(
            dim=geti("model.dim", base.dim),
            heads=geti("model.heads", base.heads),
            layers=geti("model.layers", base.layers),
            hidden_dim=geti("model.hidden_dim", base.hidden_dim),
            out_dim=geti("model.out_dim", base.out_dim),
            rho=getf("model.rho", base.rho),
            slope=getf("model.slope", base.slope),
            include_inverse=getb("model.include_inverse", base.include_inverse),
            lr=getf("train.lr", base.lr),
            batch=geti("train.batch", base.batch),
            epochs=geti("train.epochs", base.epochs),
            margin=getf("train.margin", base.margin),
            l2=getf("train.l2", base.l2),
            negatives=geti("train.negatives", base.negatives),
            seed=geti("train.seed", base.seed),
            gate_in_training=getb("train.gate_in_training", base.gate_in_training),
            corrupt_relation=getb("train.corrupt_relation", base.corrupt_relation),
            use_relation_in_neighbors=getb("ablation.use_relation",
                                           base.use_relation_in_neighbors),
            desc_mode=flat.get("ablation.desc_mode", base.desc_mode),
            richness_gate=getb("ablation.richness_gate", base.richness_gate),
            richness=RichnessConfig(k=getf("richness.k", base.richness.k),
                                    threshold=getf("richness.threshold",
                                                   base.richness.threshold)),
            transe_lr=getf("transe.lr", base.transe_lr),
            transe_margin=getf("transe.margin", base.transe_margin),
            transe_epochs=geti("transe.epochs", base.transe_epochs),
            transe_batch=geti("transe.batch", base.transe_batch),
            transe_seed=geti("transe.seed", base.transe_seed),
        )


@dataclass
class _BatchResult:
    loss: float
    grads: dict[str, np.ndarray] | None
    active: int


def _batch_loss(edges: EdgeIndex, params: ModelParams,
                bank: DescriptionBank | None, desc_mode: str,
                positives: Sequence[Triple],
                negatives: Sequence[Sequence[Triple]],
                margin: float, rich: np.ndarray | None,
                want_grads: bool, kink: KinkTracker | None = None) -> _BatchResult:
    """Summed hinge loss of one batch, optionally with gradients for every
    model parameter.  ``rich`` is the per-entity richness verdict; when given,
    triples whose endpoints are both rich train on the structural distance
    alone, mirroring the scoring gate.
    """
    e1, r1, gat_cache = forward_cached(edges, params.embeddings.entities,
                                       params.embeddings.relations, params.gat,
                                       kink=kink)
    has_desc = bank is not None and params.desc is not None

    desc_vecs: dict[int, np.ndarray] = {}
    desc_caches: dict[int, dict] = {}

    def desc_vec(e: int):
        if not has_desc or e not in bank:
            return None
        if e not in desc_vecs:
            cache: dict = {}
            if desc_mode == "attention":
                desc_vecs[e] = desc_mod.aggregate_description(
                    e1[e], bank.get(e), params.desc, cache=cache, kink=kink)
            elif desc_mode == "mean":
                desc_vecs[e] = desc_mod.mean_description(
                    bank.get(e), params.desc, cache=cache)
            else:
                raise ConfigError(f"unknown description mode {desc_mode!r}")
            desc_caches[e] = cache
        return desc_vecs[e]

    def triple_terms(t: Triple):
        """Energy of one triple as a list of norm terms:
        (u, norm, a_kind, a_idx, b_kind, b_idx, rel_idx)."""
        h, r, tl = t
        gated = rich is not None and bool(rich[h]) and bool(rich[tl])
        terms = []

        def add(av, ak, ai, bv, bk, bi):
            u = av + r1[r] - bv
            n = float(np.sqrt(u @ u))
            if kink is not None:
                kink.add(np.array([n]))
            terms.append((u, n, ak, ai, bk, bi, r))
            return n

        h_g, t_g = e1[h], e1[tl]
        d = add(h_g, "g", h, t_g, "g", tl)
        if not gated:
            h_w, t_w = desc_vec(h), desc_vec(tl)
            if h_w is not None and t_w is not None:
                d += add(h_w, "w", h, t_w, "w", tl)
            if h_w is not None:
                d += add(h_w, "w", h, t_g, "g", tl)
            if t_w is not None:
                d += add(h_g, "g", h, t_w, "w", tl)
        return d, terms

    d_e1 = np.zeros_like(e1)
    d_r1 = np.zeros_like(r1)
    d_desc: dict[int, np.ndarray] = {}

    def apply_terms(terms, coeff: float):
        for u, n, ak, ai, bk, bi, r in terms:
            g = (coeff / max(n, 1e-12)) * u
            if ak == "g":
                d_e1[ai] += g
            else:
                d_desc[ai] = d_desc.get(ai, 0.0) + g
            if bk == "g":
                d_e1[bi] -= g
            else:
                d_desc[bi] = d_desc.get(bi, 0.0) - g
            d_r1[r] += g

    loss = 0.0
    active = 0
    for pos, negs in zip(positives, negatives):
        d_pos, pos_terms = triple_terms(pos)
        for neg in negs:
            d_neg, neg_terms = triple_terms(neg)
            gap = margin + d_pos - d_neg
            if kink is not None:
                kink.add(np.array([gap]))
            if gap > 0:
                loss += gap
                active += 1
                if want_grads:
                    apply_terms(pos_terms, 1.0)
                    apply_terms(neg_terms, -1.0)

    if not want_grads:
        return _BatchResult(loss=loss, grads=None, active=active)

    grads = {name: np.zeros_like(arr) for name, arr in iter_params(params)}
    for e, g in sorted(d_desc.items()):
        if desc_mode == "attention":
            dproj, dw, dz, dh = backward_attention(params.desc, desc_caches[e], g)
            grads["desc.proj"] += dproj
            grads["desc.attn_w"] += dw
            grads["desc.attn_z"] += dz
            d_e1[e] += dh
        else:
            grads["desc.proj"] += backward_mean(params.desc, desc_caches[e], g)
    for name, g in backward_cached(edges, params.gat, gat_cache, d_e1, d_r1).items():
        grads[name] += g
    return _BatchResult(loss=loss, grads=grads, active=active)


def _l2_penalty(params: ModelParams, l2: float) -> float:
    if l2 == 0:
        return 0.0
    return l2 * sum(float((a * a).sum()) for _, a in iter_params(params))


def train(kg: KnowledgeGraph, cfg: TrainConfig,
          triples: Sequence[Triple] | None = None,
          bank: DescriptionBank | None = None,
          init: EmbeddingTable | None = None,
          on_epoch: EpochHook | None = None) -> Checkpoint:
    """Run translation pretraining (unless ``init`` is given) followed by
    joint margin training.  Returns a checkpoint carrying the full parameter
    bundle, the flattened config, and the per-epoch loss history.
    """
    triples = list(kg.triples if triples is None else triples)
    if not triples:
        raise ConfigError("cannot train on an empty triple list")
    if init is None:
        init = pretrain_embeddings(
            kg, TransEConfig(margin=cfg.transe_margin, lr=cfg.transe_lr,
                             epochs=cfg.transe_epochs, seed=cfg.transe_seed,
                             batch_size=cfg.transe_batch),
            cfg.dim, triples=triples)
    rng = np.random.default_rng(cfg.seed)
    params = init_model_params(
        kg, rng, dim=cfg.dim, heads=cfg.heads, layers=cfg.layers,
        hidden_dim=cfg.effective_hidden, out_dim=cfg.effective_out,
        slope=cfg.slope, rho=cfg.effective_rho,
        desc_source_dim=bank.dim if bank is not None else None,
        embeddings=init)
    edges = build_edges(kg, cfg.include_inverse)

    rich = None
    if cfg.gate_in_training and cfg.richness_gate:
        values = np.array([kg_mod.structure_richness(kg, e, cfg.richness)
                           for e in range(kg.n_entities)])
        rich = values >= cfg.richness.threshold

    n = len(triples)
    losses: list[float] = []
    # overflow inside a diverging epoch is reported through TrainingDiverged,
    # not as a warning storm
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(cfg.epochs):
            order = rng.permutation(n)
            hinge_sum = 0.0
            for lo in range(0, n, cfg.batch):
                batch = [triples[i] for i in order[lo:lo + cfg.batch]]
                negatives = [
                    [s.triple for s in objective.sample_negatives(
                        kg, pos, cfg.negatives, rng,
                        corrupt_relation=cfg.corrupt_relation)]
                    for pos in batch
                ]
                result = _batch_loss(edges, params, bank, cfg.desc_mode, batch,
                                     negatives, cfg.margin, rich, want_grads=True)
                hinge_sum += result.loss
                for name, arr in iter_params(params):
                    g = result.grads[name]
                    if cfg.l2:
                        g = g + 2.0 * cfg.l2 * arr
                    arr -= cfg.lr * g
            loss = hinge_sum + _l2_penalty(params, cfg.l2)
            finite = np.isfinite(loss) and all(
                np.isfinite(a).all() for _, a in iter_params(params))
            if not finite:
                raise TrainingDiverged(epoch, loss)
            losses.append(loss)
            if on_epoch is not None:
                on_epoch(epoch, loss)
    return Checkpoint(params=params, config=cfg.to_flat(),
                      epoch=cfg.epochs, losses=losses)


def gradient_errors(params: ModelParams, edges: EdgeIndex,
                    bank: DescriptionBank | None, desc_mode: str,
                    positives: Sequence[Triple],
                    negatives: Sequence[Sequence[Triple]],
                    margin: float = 1.0, l2: float = 0.0,
                    rich: np.ndarray | None = None,
                    step: float = 1e-5, kink_tol: float = 1e-6) -> dict[str, float]:
    """Max relative error between analytic and central finite-difference
    gradients, per parameter.  Elements whose nudged evaluations pass within
    ``kink_tol`` of a nonsmooth point are skipped.
    """
    analytic = _batch_loss(edges, params, bank, desc_mode, positives,
                           negatives, margin, rich, want_grads=True).grads
    if l2:
        for name, arr in iter_params(params):
            analytic[name] = analytic[name] + 2.0 * l2 * arr

    def loss_at() -> tuple[float, float]:
        kink = KinkTracker()
        res = _batch_loss(edges, params, bank, desc_mode, positives,
                          negatives, margin, rich, want_grads=False, kink=kink)
        return res.loss + _l2_penalty(params, l2), kink.min_dist

    errors: dict[str, float] = {}
    for name, arr in iter_params(params):
        worst = 0.0
        ga = analytic[name]
        for ix in np.ndindex(arr.shape):
            old = arr[ix]
            arr[ix] = old + step
            lp, kp = loss_at()
            arr[ix] = old - step
            lm, km = loss_at()
            arr[ix] = old
            if min(kp, km) < kink_tol:
                continue
            gfd = (lp - lm) / (2.0 * step)
            rel = abs(ga[ix] - gfd) / max(abs(ga[ix]) + abs(gfd), 1e-4)
            worst = max(worst, rel)
        errors[name] = worst
    return errors


def check_gradients(seed: int = 0, desc_mode: str = "attention",
                    gate_in_training: bool = False,
                    step: float = 1e-5, kink_tol: float = 1e-6) -> float:
    """Audit the analytic gradients on a small random graph with partial
    description coverage.  Returns the worst relative error over every
    parameter of the model."""
    kg = generate_synthetic(10, n_relations=3, extra_edges=6, relate_edges=5,
                            symmetric_fraction=0.4, seed=seed)
    bank = random_bank(kg, dim=5, coverage=0.7, max_sentences=3, seed=seed + 1)
    rng = np.random.default_rng(seed + 2)
    params = init_model_params(kg, rng, dim=6, heads=2, layers=2, hidden_dim=3,
                               out_dim=6, rho=0.5, desc_source_dim=5)
    edges = build_edges(kg)
    picks = rng.choice(kg.n_triples, size=min(6, kg.n_triples), replace=False)
    positives = [kg.triples[int(i)] for i in picks]
    negatives = [[s.triple for s in objective.sample_negatives(kg, pos, 2, rng)]
                 for pos in positives]
    rich = None
    if gate_in_training:
        rcfg = RichnessConfig()
        values = np.array([kg_mod.structure_richness(kg, e, rcfg)
                           for e in range(kg.n_entities)])
        rich = values >= rcfg.threshold
    errors = gradient_errors(params, edges, bank, desc_mode, positives,
                             negatives, margin=1.0, l2=1e-4, rich=rich,
                             step=step, kink_tol=kink_tol)
    return max(errors.values())
