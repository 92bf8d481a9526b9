"""Relation-aware graph attention encoder.

Each target node attends over its neighbors; a neighbor enters the layer as
the mix rho * h_neighbor + (1 - rho) * r_relation.  Interior layers apply a
LeakyReLU and concatenate heads, the final layer averages raw head outputs.
After every layer the relation table is pushed through that layer's linear
transform so relations keep the entity dimension.  The encoder output adds a
learned linear residual of the initial entity table to the attention output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EmptyNeighborhoodError, ShapeError
from .kg import KnowledgeGraph

DEFAULT_SLOPE = 0.2


def leaky_relu(x, slope=DEFAULT_SLOPE):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, x, slope * x)


def _leaky_grad(x, slope):
    return np.where(x > 0, 1.0, slope)


class KinkTracker:
    """Smallest distance to a non-differentiable point seen during a forward."""

    def __init__(self):
        self.min_dist = np.inf

    def add(self, values) -> None:
        values = np.asarray(values)
        if values.size:
            self.min_dist = min(self.min_dist, float(np.abs(values).min()))


@dataclass
class GatLayerParams:
    weights: list[np.ndarray]  # per head, (in_dim, out_dim)
    attn: list[np.ndarray]     # per head, (2 * out_dim,)
    slope: float = DEFAULT_SLOPE

    def __post_init__(self):
        if not self.weights:
            raise ConfigError("a layer needs at least one head")
        if len(self.weights) != len(self.attn):
            raise ShapeError("weights and attention vectors disagree in head count")
        shape = self.weights[0].shape
        for w, z in zip(self.weights, self.attn):
            if w.shape != shape:
                raise ShapeError("heads disagree in weight shape")
            if z.shape != (2 * shape[1],):
                raise ShapeError(f"attention vector must have length {2 * shape[1]}")
        if not 0 < self.slope < 1:
            raise ConfigError(f"leaky slope must lie in (0, 1), got {self.slope}")

    @property
    def heads(self) -> int:
        return len(self.weights)

    @property
    def in_dim(self) -> int:
        return int(self.weights[0].shape[0])

    @property
    def out_dim(self) -> int:
        return int(self.weights[0].shape[1])


@dataclass
class GatParams:
    layers: list[GatLayerParams]
    rel_transforms: list[np.ndarray]  # per layer, (in_dim, entity dim after layer)
    ent_residual: np.ndarray          # (initial dim, final dim)
    rho: float = 0.5

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("need at least one attention layer")
        if len(self.rel_transforms) != len(self.layers):
            raise ShapeError("one relation transform per layer is required")
        if not 0 < self.rho <= 1:
            raise ConfigError(f"rho must lie in (0, 1], got {self.rho}")
        last = len(self.layers) - 1
        in_dim = self.layers[0].in_dim
        for i, layer in enumerate(self.layers):
            if layer.in_dim != in_dim:
                raise ShapeError(f"layer {i} expects input dim {layer.in_dim}, got {in_dim}")
            out = layer.out_dim if i == last else layer.out_dim * layer.heads
            if self.rel_transforms[i].shape != (in_dim, out):
                raise ShapeError(
                    f"relation transform {i} must be {(in_dim, out)}, "
                    f"got {self.rel_transforms[i].shape}")
            in_dim = out
        if self.ent_residual.shape != (self.layers[0].in_dim, in_dim):
            raise ShapeError(
                f"entity residual must be {(self.layers[0].in_dim, in_dim)}, "
                f"got {self.ent_residual.shape}")

    @property
    def out_dim(self) -> int:
        return int(self.ent_residual.shape[1])


@dataclass
class GatOutput:
    entities: np.ndarray   # E' = E @ W_ent + E_f
    relations: np.ndarray  # R' after all per-layer transforms
    attention: list | None = None  # per layer: (n_edges, heads) weights


@dataclass
class EdgeIndex:
    """Directed attention edges grouped by target node.

    Every triple contributes the edge tail <- (head, relation); with inverse
    edges the head also receives (tail, relation).  Arrays are sorted by
    target; ``starts``/``nodes`` delimit the per-target groups and ``group``
    maps each edge to its group index.
    """

    tgt: np.ndarray
    src: np.ndarray
    rel: np.ndarray
    starts: np.ndarray
    nodes: np.ndarray
    group: np.ndarray
    n_entities: int

    @property
    def n_edges(self) -> int:
        return int(self.tgt.shape[0])


def build_edges(kg: KnowledgeGraph, include_inverse: bool = True) -> EdgeIndex:
    tgt, src, rel = [], [], []
    for h, r, t in kg.triples:
        tgt.append(t)
        src.append(h)
        rel.append(r)
        if include_inverse:
            tgt.append(h)
            src.append(t)
            rel.append(r)
    tgt = np.array(tgt, dtype=np.int64)
    src = np.array(src, dtype=np.int64)
    rel = np.array(rel, dtype=np.int64)
    order = np.argsort(tgt, kind="stable")
    tgt, src, rel = tgt[order], src[order], rel[order]
    nodes, starts = np.unique(tgt, return_index=True)
    counts = np.diff(np.append(starts, tgt.shape[0]))
    group = np.repeat(np.arange(nodes.shape[0]), counts)
    return EdgeIndex(tgt=tgt, src=src, rel=rel, starts=starts, nodes=nodes,
                     group=group, n_entities=kg.n_entities)


def neighbor_mix(h_s: np.ndarray, r_s: np.ndarray, rho: float) -> np.ndarray:
    """Neighbor vector entering attention: rho * h_s + (1 - rho) * r_s."""
    h_s = np.asarray(h_s, dtype=np.float64)
    r_s = np.asarray(r_s, dtype=np.float64)
    if h_s.shape != r_s.shape:
        raise ShapeError(f"mix operands disagree: {h_s.shape} vs {r_s.shape}")
    if not 0.0 <= rho <= 1.0:
        raise ConfigError(f"rho must lie in [0, 1], got {rho}")
    return rho * h_s + (1.0 - rho) * r_s


def attention_weights(target: np.ndarray, neighbors, layer: GatLayerParams,
                      head: int = 0) -> np.ndarray:
    """Softmax attention of ``target`` over mixed neighbor vectors."""
    if len(neighbors) == 0:
        raise EmptyNeighborhoodError("no neighbors to attend over")
    w = layer.weights[head]
    z = layer.attn[head]
    out = w.shape[1]
    ph = np.asarray(target, dtype=np.float64) @ w
    pm = np.asarray(neighbors, dtype=np.float64) @ w
    logits = leaky_relu(pm @ z[out:] + ph @ z[:out], layer.slope)
    logits = logits - logits.max()
    ex = np.exp(logits)
    return ex / ex.sum()


def aggregate(weights, neighbors, layer: GatLayerParams, head: int = 0,
              activation: bool = True) -> np.ndarray:
    """Weighted sum of projected neighbors, optionally through the LeakyReLU."""
    weights = np.asarray(weights, dtype=np.float64)
    pm = np.asarray(neighbors, dtype=np.float64) @ layer.weights[head]
    agg = weights @ pm
    return leaky_relu(agg, layer.slope) if activation else agg


def multi_head(outputs, mode: str) -> np.ndarray:
    """Combine per-head outputs: "concat" for interior layers, "average" last."""
    outputs = [np.asarray(o, dtype=np.float64) for o in outputs]
    if mode == "concat":
        return np.concatenate(outputs, axis=-1)
    if mode == "average":
        return np.mean(np.stack(outputs), axis=0)
    raise ConfigError(f"unknown multi-head mode {mode!r}")


def init_gat_params(rng: np.random.Generator, in_dim: int, hidden_dim: int,
                    out_dim: int, heads: int, layers: int,
                    slope: float = DEFAULT_SLOPE, rho: float = 0.5) -> GatParams:
    """Xavier attention weights; relation/residual transforms start at the
    identity when square so the encoder initially passes embeddings through."""
    from .transe import xavier_uniform

    if layers < 1 or heads < 1:
        raise ConfigError("need at least one layer and one head")
    layer_list = []
    rel_list = []
    cur = in_dim
    for i in range(layers):
        final = i == layers - 1
        head_out = out_dim if final else hidden_dim
        ws = [xavier_uniform(rng, cur, head_out) for _ in range(heads)]
        zs = [xavier_uniform(rng, 2 * head_out, 1)[:, 0] for _ in range(heads)]
        layer_list.append(GatLayerParams(weights=ws, attn=zs, slope=slope))
        after = head_out if final else head_out * heads
        if cur == after:
            rel_list.append(np.eye(cur))
        else:
            rel_list.append(xavier_uniform(rng, cur, after))
        cur = after
    if in_dim == cur:
        ent_residual = np.eye(in_dim)
    else:
        ent_residual = xavier_uniform(rng, in_dim, cur)
    return GatParams(layers=layer_list, rel_transforms=rel_list,
                     ent_residual=ent_residual, rho=rho)


def _segment_softmax(v: np.ndarray, edges: EdgeIndex) -> np.ndarray:
    if v.size == 0:
        return v.copy()
    gmax = np.maximum.reduceat(v, edges.starts)
    ex = np.exp(v - gmax[edges.group])
    gsum = np.add.reduceat(ex, edges.starts)
    return ex / gsum[edges.group]


def forward_cached(edges: EdgeIndex, ent0: np.ndarray, rel0: np.ndarray,
                   params: GatParams, kink: KinkTracker | None = None,
                   keep_attention: bool = False):
    """Full-graph forward pass.  Returns (E', R', cache); the cache carries
    every intermediate needed by backward_cached."""
    h = np.asarray(ent0, dtype=np.float64)
    rel = np.asarray(rel0, dtype=np.float64)
    n_layers = len(params.layers)
    cache = {"h_in": [], "rel_in": [], "mix": [], "heads": [], "attention": []}
    for i, layer in enumerate(params.layers):
        final = i == n_layers - 1
        cache["h_in"].append(h)
        cache["rel_in"].append(rel)
        mix = params.rho * h[edges.src] + (1.0 - params.rho) * rel[edges.rel]
        cache["mix"].append(mix)
        head_caches = []
        outs = []
        att = np.empty((edges.n_edges, layer.heads)) if keep_attention else None
        for k in range(layer.heads):
            w, z = layer.weights[k], layer.attn[k]
            out_dim = w.shape[1]
            ph = h @ w
            pm = mix @ w
            pre = ph[edges.tgt] @ z[:out_dim] + pm @ z[out_dim:]
            if kink is not None:
                kink.add(pre)
            v = leaky_relu(pre, layer.slope)
            alpha = _segment_softmax(v, edges)
            agg = np.zeros((edges.n_entities, out_dim))
            if edges.n_edges:
                agg[edges.nodes] = np.add.reduceat(alpha[:, None] * pm,
                                                   edges.starts, axis=0)
            if final:
                out = agg
            else:
                if kink is not None:
                    kink.add(agg)
                out = leaky_relu(agg, layer.slope)
            outs.append(out)
            head_caches.append({"ph": ph, "pm": pm, "pre": pre, "alpha": alpha,
                                "agg": agg})
            if keep_attention:
                att[:, k] = alpha
        cache["heads"].append(head_caches)
        if keep_attention:
            cache["attention"].append(att)
        h = outs[0] if final and layer.heads == 1 else (
            np.mean(np.stack(outs), axis=0) if final else np.concatenate(outs, axis=1))
        rel = rel @ params.rel_transforms[i]
    e_final = h
    e_out = np.asarray(ent0, dtype=np.float64) @ params.ent_residual + e_final
    return e_out, rel, cache


def backward_cached(edges: EdgeIndex, params: GatParams, cache,
                    d_eout: np.ndarray, d_rout: np.ndarray) -> dict[str, np.ndarray]:
    """Exact gradients of the encoder given gradients at E' and R'.

    Returns a dict keyed like checkpoint matrices, plus "embeddings.entities"
    and "embeddings.relations" for the initial tables.
    """
    grads: dict[str, np.ndarray] = {}
    ent0 = cache["h_in"][0]
    grads["gat.ent_w"] = ent0.T @ d_eout
    d_e0 = d_eout @ params.ent_residual.T
    dh = d_eout  # gradient at the final attention output
    drel = d_rout
    n_layers = len(params.layers)
    for i in reversed(range(n_layers)):
        layer = params.layers[i]
        final = i == n_layers - 1
        h_in = cache["h_in"][i]
        rel_in = cache["rel_in"][i]
        mix = cache["mix"][i]
        grads[f"gat.layer{i}.rel_w"] = rel_in.T @ drel
        drel_in = drel @ params.rel_transforms[i].T
        d_hin = np.zeros_like(h_in)
        d_mix = np.zeros_like(mix)
        for k in range(layer.heads):
            hc = cache["heads"][i][k]
            w, z = layer.weights[k], layer.attn[k]
            out_dim = w.shape[1]
            if final:
                d_out = dh / layer.heads
            else:
                d_out = dh[:, k * out_dim:(k + 1) * out_dim]
                d_out = d_out * _leaky_grad(hc["agg"], layer.slope)
            d_agg_e = d_out[edges.tgt]
            d_alpha = np.einsum("ij,ij->i", d_agg_e, hc["pm"])
            d_pm = hc["alpha"][:, None] * d_agg_e
            sdot = np.add.reduceat(hc["alpha"] * d_alpha, edges.starts) \
                if edges.n_edges else np.zeros(0)
            dv = hc["alpha"] * (d_alpha - sdot[edges.group])
            d_pre = dv * _leaky_grad(hc["pre"], layer.slope)
            ph_t = hc["ph"][edges.tgt]
            grads[f"gat.layer{i}.head{k}.z"] = np.concatenate(
                [d_pre @ ph_t, d_pre @ hc["pm"]])
            d_ph = np.zeros((edges.n_entities, out_dim))
            np.add.at(d_ph, edges.tgt, d_pre[:, None] * z[:out_dim])
            d_pm = d_pm + d_pre[:, None] * z[out_dim:]
            grads[f"gat.layer{i}.head{k}.w"] = h_in.T @ d_ph + mix.T @ d_pm
            d_hin += d_ph @ w.T
            d_mix += d_pm @ w.T
        np.add.at(d_hin, edges.src, params.rho * d_mix)
        d_rel_mix = np.zeros_like(rel_in)
        np.add.at(d_rel_mix, edges.rel, (1.0 - params.rho) * d_mix)
        drel = drel_in + d_rel_mix
        dh = d_hin
    grads["embeddings.entities"] = d_e0 + dh
    grads["embeddings.relations"] = drel
    return grads


def encode_graph(kg: KnowledgeGraph, init, params: GatParams,
                 include_inverse: bool = True,
                 keep_attention: bool = False) -> GatOutput:
    """Encode every entity and relation of ``kg`` starting from ``init``
    (an EmbeddingTable).  Entities without neighbors keep a zero attention
    output, so their final row is just the residual of their initial row."""
    if init.entities.shape[0] != kg.n_entities:
        raise ShapeError("entity table does not match the graph")
    if init.relations.shape[0] != kg.n_relations:
        raise ShapeError("relation table does not match the graph")
    if init.entities.shape[1] != params.layers[0].in_dim:
        raise ShapeError("embedding dim does not match the first layer")
    edges = build_edges(kg, include_inverse)
    e_out, r_out, cache = forward_cached(edges, init.entities, init.relations,
                                         params, keep_attention=keep_attention)
    attention = cache["attention"] if keep_attention else None
    return GatOutput(entities=e_out, relations=r_out, attention=attention)
