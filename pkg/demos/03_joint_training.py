"""Full joint run: graph encoder plus description attention, then evaluation.

Run: python3 demos/03_joint_training.py
"""

from ndrl import (TrainConfig, build_scoring_state, evaluate,
                  generate_synthetic, random_bank, split_dataset, train)

kg = generate_synthetic(120, n_relations=3, extra_edges=50, relate_edges=60,
                        symmetric_fraction=0.8, seed=11)
bank = random_bank(kg, dim=16, coverage=0.6, max_sentences=4, seed=3)
split = split_dataset(kg, (7.0, 1.5, 1.5), seed=7)
print(f"{kg.n_triples} triples -> train {len(split.train)} / "
      f"valid {len(split.valid)} / test {len(split.test)}; "
      f"descriptions for {len(bank)} of {kg.n_entities} entities")

cfg = TrainConfig(dim=32, epochs=60, seed=11)
ckpt = train(kg, cfg, triples=split.train, bank=bank,
             on_epoch=lambda e, l: print(f"  epoch {e:>3}  loss {l:10.3f}")
             if e % 10 == 0 else None)

state = build_scoring_state(ckpt.params, kg, bank, cfg.richness, gate=True)
report = evaluate(state, kg, split.test, known=kg.triples)
print()
print(report.as_text())
