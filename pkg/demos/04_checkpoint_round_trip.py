"""Checkpoints reproduce their evaluation numbers after a round trip.

Run: python3 demos/04_checkpoint_round_trip.py
"""

import tempfile
from pathlib import Path

from ndrl import (TrainConfig, build_scoring_state, evaluate,
                  generate_synthetic, load_checkpoint, random_bank,
                  save_checkpoint, split_dataset, train)

kg = generate_synthetic(40, n_relations=3, extra_edges=20, relate_edges=14,
                        symmetric_fraction=0.5, seed=13)
bank = random_bank(kg, dim=8, coverage=0.6, max_sentences=3, seed=14)
split = split_dataset(kg, (7.0, 1.5, 1.5), seed=7)
cfg = TrainConfig(dim=10, epochs=8, batch=64, seed=15, transe_epochs=20)

ckpt = train(kg, cfg, triples=split.train, bank=bank)
state = build_scoring_state(ckpt.params, kg, bank, cfg.richness, gate=True)
before = evaluate(state, kg, split.test, known=kg.triples)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.ck"
    save_checkpoint(path, ckpt)
    size = path.stat().st_size
    loaded = load_checkpoint(path)

state = build_scoring_state(loaded.params, kg, bank, cfg.richness, gate=True)
after = evaluate(state, kg, split.test, known=kg.triples)

print(f"checkpoint file: {size} bytes, epoch {loaded.epoch}, "
      f"{len(loaded.losses)} recorded losses")
print(f"MR before save  {before.mr_filtered!r}")
print(f"MR after load   {after.mr_filtered!r}")
print(f"reports identical: {before == after}")
