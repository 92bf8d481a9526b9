"""Link-prediction evaluation: head and tail queries, raw and filtered.

Ranks use average tie handling: 1 + strictly-better + ties / 2, so a score
shared by several candidates yields half-integer ranks instead of rewarding
an arbitrary candidate order.  The filtered protocol drops every candidate
that forms a known positive with the query prefix, except the true entity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .kg import KnowledgeGraph, Triple
from .objective import ScoringState, score_candidates


@dataclass
class EvalReport:
    mr_raw: float
    mrr_raw: float
    hits1_raw: float
    hits10_raw: float
    mr_filtered: float
    mrr_filtered: float
    hits1_filtered: float
    hits10_filtered: float
    n_queries: int

    def as_text(self) -> str:
        rows = [
            ("MR", self.mr_raw, self.mr_filtered),
            ("MRR", self.mrr_raw, self.mrr_filtered),
            ("Hits@1", self.hits1_raw, self.hits1_filtered),
            ("Hits@10", self.hits10_raw, self.hits10_filtered),
        ]
        lines = [f"{'metric':<10} {'raw':>12} {'filtered':>12}"]
        for name, raw, filt in rows:
            lines.append(f"{name:<10} {raw:>12.4f} {filt:>12.4f}")
        lines.append(f"{'queries':<10} {self.n_queries:>12}")
        lines.append("")
        for key, value in self.as_pairs():
            lines.append(f"{key}={value!r}" if isinstance(value, float)
                         else f"{key}={value}")
        return "\n".join(lines) + "\n"

    def as_pairs(self) -> list[tuple[str, object]]:
        return [
            ("mr.raw", self.mr_raw), ("mr.filtered", self.mr_filtered),
            ("mrr.raw", self.mrr_raw), ("mrr.filtered", self.mrr_filtered),
            ("hits1.raw", self.hits1_raw), ("hits1.filtered", self.hits1_filtered),
            ("hits10.raw", self.hits10_raw),
            ("hits10.filtered", self.hits10_filtered),
            ("queries", self.n_queries),
        ]


def average_rank(scores: np.ndarray, true_idx: int,
                 excluded: np.ndarray | None = None) -> float:
    """Rank of the true candidate under lower-is-better scores.

    ``excluded`` marks candidates removed from the ranking (the true entity
    is always kept).  Ties with the true score contribute half a rank each.
    """
    s = scores[true_idx]
    if excluded is None:
        better = int(np.count_nonzero(scores < s))
        ties = int(np.count_nonzero(scores == s)) - 1
    else:
        keep = ~np.asarray(excluded, dtype=bool)
        keep = keep.copy()
        keep[true_idx] = True
        kept = scores[keep]
        better = int(np.count_nonzero(kept < s))
        ties = int(np.count_nonzero(kept == s)) - 1
    return 1.0 + better + 0.5 * ties


def ranks_to_metrics(ranks: Sequence[float]) -> tuple[float, float, float, float]:
    """(MR, MRR, Hits@1, Hits@10) of a rank list."""
    if not len(ranks):
        raise ConfigError("no ranks to aggregate")
    arr = np.asarray(ranks, dtype=np.float64)
    return (float(arr.mean()), float((1.0 / arr).mean()),
            float((arr <= 1.0).mean()), float((arr <= 10.0).mean()))


def _exclusion_maps(known: Iterable[Triple]):
    by_hr: dict[tuple[int, int], list[int]] = {}
    by_rt: dict[tuple[int, int], list[int]] = {}
    for h, r, t in known:
        by_hr.setdefault((h, r), []).append(t)
        by_rt.setdefault((r, t), []).append(h)
    return by_hr, by_rt


def _query(state: ScoringState, triple: Triple, side: str,
           by_hr, by_rt) -> tuple[float, float]:
    h, r, t = triple
    if side == "tail":
        scores = score_candidates(state, r, head=h)
        true_idx, competitors = t, by_hr.get((h, r), ())
    elif side == "head":
        scores = score_candidates(state, r, tail=t)
        true_idx, competitors = h, by_rt.get((r, t), ())
    else:
        raise ConfigError(f"side must be 'head' or 'tail', got {side!r}")
    raw = average_rank(scores, true_idx)
    excluded = np.zeros(scores.shape[0], dtype=bool)
    if competitors:
        excluded[list(competitors)] = True
    excluded[true_idx] = False
    filtered = average_rank(scores, true_idx, excluded)
    return raw, filtered


def rank_entity_side(state: ScoringState, kg: KnowledgeGraph, triple: Triple,
                     side: str, known: Iterable[Triple] = ()) -> tuple[float, float]:
    """(raw, filtered) rank of one side of one triple."""
    kg._check_entity(triple.head)
    kg._check_entity(triple.tail)
    by_hr, by_rt = _exclusion_maps(known)
    return _query(state, triple, side, by_hr, by_rt)


def evaluate(state: ScoringState, kg: KnowledgeGraph,
             test: Sequence[Triple], known: Iterable[Triple] = ()) -> EvalReport:
    """Rank both sides of every test triple.  ``known`` carries every
    positive triple (train, validation and test together) for filtering."""
    test = list(test)
    if not test:
        raise ConfigError("cannot evaluate an empty triple list")
    if state.n_entities != kg.n_entities:
        raise ConfigError("scoring state does not match the graph")
    by_hr, by_rt = _exclusion_maps(known)
    raw_ranks: list[float] = []
    filt_ranks: list[float] = []
    for triple in test:
        for side in ("tail", "head"):
            raw, filt = _query(state, triple, side, by_hr, by_rt)
            raw_ranks.append(raw)
            filt_ranks.append(filt)
    mr_r, mrr_r, h1_r, h10_r = ranks_to_metrics(raw_ranks)
    mr_f, mrr_f, h1_f, h10_f = ranks_to_metrics(filt_ranks)
    return EvalReport(mr_raw=mr_r, mrr_raw=mrr_r, hits1_raw=h1_r,
                      hits10_raw=h10_r, mr_filtered=mr_f, mrr_filtered=mrr_f,
                      hits1_filtered=h1_f, hits10_filtered=h10_f,
                      n_queries=len(raw_ranks))
