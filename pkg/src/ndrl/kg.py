"""Triple storage: vocabularies, adjacency indexes, splits, richness, synthesis.

Triple files are UTF-8 text, one ``head<TAB>relation<TAB>tail`` per line,
``#``-prefixed lines are comments, blank lines are ignored.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    ConfigError,
    EmptyGraphError,
    EntityLookupError,
    TripleFormatError,
)

log = logging.getLogger(__name__)


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


class Neighbor(NamedTuple):
    entity: int
    relation: int
    direction: str  # "in" when the target is the tail, "out" otherwise


@dataclass(frozen=True)
class RichnessConfig:
    """Weight and threshold for structure richness N(e) = n_e + k * n_Ne."""

    k: float = 0.5
    threshold: float = 12.0

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ConfigError(f"richness k must lie in [0, 1], got {self.k}")
        if math.isnan(self.threshold) or self.threshold < 0:
            raise ConfigError(f"richness threshold must be >= 0, got {self.threshold}")


@dataclass
class DatasetSplit:
    train: list[Triple]
    valid: list[Triple]
    test: list[Triple]

    def __iter__(self):
        return iter((self.train, self.valid, self.test))


class KnowledgeGraph:
    """Immutable triple store with label vocabularies and adjacency indexes.

    Entity and relation handles are dense integers assigned by first
    appearance.  Duplicate triples are collapsed; the number dropped is kept
    in ``duplicates_dropped``.
    """

    def __init__(self, entities: Sequence[str], relations: Sequence[str],
                 triples: Iterable[tuple[int, int, int]]):
        self.entities = list(entities)
        self.relations = list(relations)
        if len(set(self.entities)) != len(self.entities):
            raise ConfigError("entity labels are not unique")
        if len(set(self.relations)) != len(self.relations):
            raise ConfigError("relation labels are not unique")
        self.entity_ids = {lab: i for i, lab in enumerate(self.entities)}
        self.relation_ids = {lab: i for i, lab in enumerate(self.relations)}

        seen: set[Triple] = set()
        kept: list[Triple] = []
        dropped = 0
        ne, nr = len(self.entities), len(self.relations)
        for h, r, t in triples:
            if not (0 <= h < ne and 0 <= t < ne):
                raise EntityLookupError(f"entity handle out of range in ({h}, {r}, {t})")
            if not 0 <= r < nr:
                raise EntityLookupError(f"relation handle out of range in ({h}, {r}, {t})")
            tri = Triple(h, r, t)
            if tri in seen:
                dropped += 1
                continue
            seen.add(tri)
            kept.append(tri)
        if not kept:
            raise EmptyGraphError("graph contains no triples")
        if dropped:
            log.warning("collapsed %d duplicate triple(s)", dropped)

        self.triples = kept
        self.triple_set = frozenset(kept)
        self.duplicates_dropped = dropped
        self.by_head: list[list[int]] = [[] for _ in range(ne)]
        self.by_tail: list[list[int]] = [[] for _ in range(ne)]
        for idx, tri in enumerate(kept):
            self.by_head[tri.head].append(idx)
            self.by_tail[tri.tail].append(idx)
        self.degrees = np.array(
            [len(self.by_head[e]) + len(self.by_tail[e]) for e in range(ne)],
            dtype=np.int64,
        )

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    @property
    def n_triples(self) -> int:
        return len(self.triples)

    def degree(self, e: int) -> int:
        self._check_entity(e)
        return int(self.degrees[e])

    def _check_entity(self, e: int) -> None:
        if not 0 <= e < self.n_entities:
            raise EntityLookupError(f"no entity with handle {e}")

    def __repr__(self):
        return (f"KnowledgeGraph(entities={self.n_entities}, "
                f"relations={self.n_relations}, triples={self.n_triples})")


def load_triples(path) -> KnowledgeGraph:
    """Parse a triple file into a KnowledgeGraph.

    Raises TripleFormatError with the offending line number for malformed
    lines and EmptyGraphError when no triples are found.
    """
    path = Path(path)
    entities: list[str] = []
    relations: list[str] = []
    eids: dict[str, int] = {}
    rids: dict[str, int] = {}
    triples: list[tuple[int, int, int]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            if line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3 or any(f == "" for f in fields):
                raise TripleFormatError(
                    f"expected head<TAB>relation<TAB>tail, got {line!r}",
                    path=path, line=no,
                )
            h_lab, r_lab, t_lab = fields
            for lab in (h_lab, t_lab):
                if lab not in eids:
                    eids[lab] = len(entities)
                    entities.append(lab)
            if r_lab not in rids:
                rids[r_lab] = len(relations)
                relations.append(r_lab)
            triples.append((eids[h_lab], rids[r_lab], eids[t_lab]))
    if not triples:
        raise EmptyGraphError(f"{path}: no triples found")
    return KnowledgeGraph(entities, relations, triples)


def save_triples(path, kg: KnowledgeGraph, triples: Sequence[Triple] | None = None) -> None:
    """Write triples (defaults to all of kg) in the triple-file format."""
    rows = kg.triples if triples is None else triples
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h, r, t in rows:
            fh.write(f"{kg.entities[h]}\t{kg.relations[r]}\t{kg.entities[t]}\n")


def neighborhood(kg: KnowledgeGraph, e: int, include_inverse: bool = True) -> list[Neighbor]:
    """Neighbors of ``e`` ordered by triple index.

    Without ``include_inverse`` only triples where ``e`` is the tail count
    (neighbors sit on the head side); with it, triples where ``e`` is the
    head contribute the tail as an extra neighbor.
    """
    kg._check_entity(e)
    idxs = set(kg.by_tail[e])
    if include_inverse:
        idxs |= set(kg.by_head[e])
    out: list[Neighbor] = []
    for idx in sorted(idxs):
        tri = kg.triples[idx]
        if tri.tail == e:
            out.append(Neighbor(tri.head, tri.relation, "in"))
        if include_inverse and tri.head == e:
            out.append(Neighbor(tri.tail, tri.relation, "out"))
    return out


def structure_richness(kg: KnowledgeGraph, e: int, cfg: RichnessConfig) -> float:
    """N(e) = degree(e) + k * sum of distinct neighbors' degrees."""
    kg._check_entity(e)
    neighbors: set[int] = set()
    for idx in kg.by_head[e]:
        neighbors.add(kg.triples[idx].tail)
    for idx in kg.by_tail[e]:
        neighbors.add(kg.triples[idx].head)
    neighbors.discard(e)
    n_ne = sum(int(kg.degrees[u]) for u in neighbors)
    return float(kg.degrees[e]) + cfg.k * float(n_ne)


def split_dataset(kg: KnowledgeGraph, ratios: tuple[float, float, float],
                  seed: int) -> DatasetSplit:
    """Deterministic shuffle-and-partition into train/valid/test.

    Valid and test sizes are the ratio shares rounded half-up; the remainder
    goes to train, so each part is within one triple of its exact share.
    """
    if len(ratios) != 3:
        raise ConfigError(f"expected 3 ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise ConfigError(f"ratios must be non-negative, got {ratios}")
    total = float(sum(ratios))
    if total <= 0:
        raise ConfigError("ratios must sum to a positive value")
    n = kg.n_triples
    n_valid = int(math.floor(n * ratios[1] / total + 0.5))
    n_valid = min(n_valid, n)
    n_test = int(math.floor(n * ratios[2] / total + 0.5))
    n_test = min(n_test, n - n_valid)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    order = [kg.triples[i] for i in perm]
    n_train = n - n_valid - n_test
    return DatasetSplit(
        train=order[:n_train],
        valid=order[n_train:n_train + n_valid],
        test=order[n_train + n_valid:],
    )


def save_split(out_dir, kg: KnowledgeGraph, split: DatasetSplit,
               ratios: tuple[float, float, float], seed: int) -> None:
    """Write train/valid/test triple files plus a manifest with seed and ratios."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, rows in (("train", split.train), ("valid", split.valid), ("test", split.test)):
        save_triples(out_dir / f"{name}.txt", kg, rows)
    with open(out_dir / "manifest.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"seed={seed}\n")
        fh.write("ratios=" + ":".join(_fmt_ratio(r) for r in ratios) + "\n")
        fh.write(f"train={len(split.train)}\n")
        fh.write(f"valid={len(split.valid)}\n")
        fh.write(f"test={len(split.test)}\n")


def _fmt_ratio(r: float) -> str:
    return f"{r:g}"


def load_split(in_dir, kg: KnowledgeGraph) -> DatasetSplit:
    """Read a split written by save_split back into handles of ``kg``."""
    in_dir = Path(in_dir)
    parts = []
    for name in ("train", "valid", "test"):
        rows: list[Triple] = []
        path = in_dir / f"{name}.txt"
        with open(path, encoding="utf-8") as fh:
            for no, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n").rstrip("\r")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 3:
                    raise TripleFormatError("expected 3 fields", path=path, line=no)
                try:
                    rows.append(Triple(kg.entity_ids[fields[0]],
                                       kg.relation_ids[fields[1]],
                                       kg.entity_ids[fields[2]]))
                except KeyError as exc:
                    raise EntityLookupError(f"{path}:{no}: unknown label {exc}") from exc
        parts.append(rows)
    return DatasetSplit(*parts)


def _relation_names(n_relations: int) -> list[str]:
    names = []
    for i in range(n_relations):
        if i == n_relations - 1 and n_relations >= 2:
            names.append("relate")
        elif i == 0:
            names.append("include")
        elif i == 1:
            names.append("require")
        else:
            names.append(f"rel{i}")
    return names


def generate_synthetic(n_entities: int, n_relations: int = 3, extra_edges: int = 0,
                       relate_edges: int = 0, symmetric_fraction: float = 0.0,
                       seed: int = 0) -> KnowledgeGraph:
    """Build a synthetic graph: a spanning tree of hierarchical edges, optional
    extra hierarchical edges, and a pool of "relate" edges of which a fixed
    fraction is planted as symmetric pairs.

    The number of symmetric pairs is round(symmetric_fraction * relate_edges);
    every unordered entity pair carries at most one relate edge or pair, so a
    structure scan recovers exactly that count.
    """
    if n_entities < 2:
        raise ConfigError("need at least 2 entities")
    if n_relations < 1:
        raise ConfigError("need at least 1 relation")
    if extra_edges < 0 or relate_edges < 0:
        raise ConfigError("edge counts must be non-negative")
    if not 0.0 <= symmetric_fraction <= 1.0:
        raise ConfigError("symmetric_fraction must lie in [0, 1]")
    if relate_edges > n_entities * (n_entities - 1) // 2:
        raise ConfigError("relate_edges exceeds the number of entity pairs")

    rng = np.random.default_rng(seed)
    hier = list(range(n_relations - 1)) if n_relations >= 2 else [0]
    relate_rel = n_relations - 1

    triples: list[tuple[int, int, int]] = []
    present: set[tuple[int, int, int]] = set()

    def put(h, r, t):
        tri = (h, r, t)
        present.add(tri)
        triples.append(tri)

    for child in range(1, n_entities):
        parent = int(rng.integers(0, child))
        put(parent, hier[child % len(hier)], child)

    placed = 0
    attempts = 0
    limit = 200 * max(extra_edges, 1) + 1000
    while placed < extra_edges:
        attempts += 1
        if attempts > limit:
            raise ConfigError("could not place the requested extra edges")
        u = int(rng.integers(0, n_entities))
        v = int(rng.integers(0, n_entities))
        if u == v:
            continue
        r = hier[int(rng.integers(0, len(hier)))]
        # the reverse check keeps planted symmetric pairs the only ones a
        # structure scan can find
        if (u, r, v) in present or (v, r, u) in present:
            continue
        put(u, r, v)
        placed += 1

    n_sym = int(math.floor(symmetric_fraction * relate_edges + 0.5))
    used_pairs: set[tuple[int, int]] = set()
    placed = 0
    attempts = 0
    limit = 200 * max(relate_edges, 1) + 1000
    while placed < relate_edges:
        attempts += 1
        if attempts > limit:
            raise ConfigError("could not place the requested relate edges")
        u = int(rng.integers(0, n_entities))
        v = int(rng.integers(0, n_entities))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in used_pairs:
            continue
        used_pairs.add(key)
        if placed < n_sym:
            put(u, relate_rel, v)
            put(v, relate_rel, u)
        else:
            put(u, relate_rel, v)
        placed += 1

    entities = [f"e{i}" for i in range(n_entities)]
    return KnowledgeGraph(entities, _relation_names(n_relations), triples)
