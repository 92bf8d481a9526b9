"""Synthesize a graph, look at its problem structures, print richness.

Run: python3 demos/01_generate_and_scan.py
"""

from ndrl import RichnessConfig, generate_synthetic, structure_richness
from ndrl.orc import scan

kg = generate_synthetic(40, n_relations=3, extra_edges=20, relate_edges=14,
                        symmetric_fraction=0.5, seed=7)
print(f"graph: {kg.n_entities} entities, {kg.n_relations} relations, "
      f"{kg.n_triples} triples\n")

report = scan(kg)
print(report.as_text())

cfg = RichnessConfig(k=0.5, threshold=12.0)
print("entity              richness  gate")
for e in range(8):
    value = structure_richness(kg, e, cfg)
    verdict = "rich" if value >= cfg.threshold else "plain"
    print(f"{kg.entities[e]:<18} {value:>9.1f}  {verdict}")
