"""Where plain translation embeddings stop working.

Two graphs, same size: one tree-like, one with half its relate edges planted
as symmetric pairs.  Pretraining memorizes the first and visibly fails the
second, because h + r = t and t + r = h can only both hold when r collapses
toward zero.

Run: python3 demos/02_translation_limits.py
"""

from ndrl import (TransEConfig, build_scoring_state, evaluate,
                  generate_synthetic, pretrain_embeddings)
from ndrl.orc import scan

cfg = TransEConfig(margin=1.0, lr=0.1, epochs=200, seed=4, batch_size=64)

for label, kwargs in [
    ("clean hierarchy", dict(extra_edges=15, relate_edges=0)),
    ("symmetric-heavy", dict(extra_edges=0, relate_edges=30,
                             symmetric_fraction=0.8)),
]:
    kg = generate_synthetic(50, n_relations=8, seed=4, **kwargs)
    table = pretrain_embeddings(kg, cfg, dim=64)
    state = build_scoring_state(table, kg, gate=False)
    report = evaluate(state, kg, kg.triples, known=kg.triples)
    pairs = scan(kg).symmetric_pairs
    print(f"{label:<18} symmetric pairs {pairs:>3}   "
          f"train MR {report.mr_filtered:>7.2f}   "
          f"Hits@10 {report.hits10_filtered:.3f}")
