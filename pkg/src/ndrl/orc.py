"""Structure scan: symmetric pairs, self loops, transitive triangles.

These are the one-to-one and composition patterns a pure translation model
handles poorly, so the scan reports how much of a graph sits inside them.
A symmetric pair is counted once per relation and unordered entity pair;
a transitive triangle is a distinct (a, b, c) with a->b, b->c and a->c all
present under one relation.  The participation figure is the fraction of
triples touched by at least one pattern.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kg import KnowledgeGraph, Triple


@dataclass
class OrcReport:
    n_triples: int
    symmetric_pairs: int
    self_loops: int
    transitive_triangles: int
    participating_triples: int

    @property
    def participation(self) -> float:
        return self.participating_triples / self.n_triples if self.n_triples else 0.0

    def as_pairs(self) -> list[tuple[str, object]]:
        return [
            ("triples", self.n_triples),
            ("symmetric_pairs", self.symmetric_pairs),
            ("self_loops", self.self_loops),
            ("transitive_triangles", self.transitive_triangles),
            ("participating_triples", self.participating_triples),
            ("participation_percent", f"{100.0 * self.participation:.2f}"),
        ]

    def as_text(self) -> str:
        lines = [f"{'triples':<24}{self.n_triples}",
                 f"{'symmetric pairs':<24}{self.symmetric_pairs}",
                 f"{'self loops':<24}{self.self_loops}",
                 f"{'transitive triangles':<24}{self.transitive_triangles}",
                 f"{'participating triples':<24}{self.participating_triples}",
                 f"{'participation':<24}{100.0 * self.participation:.2f}%",
                 ""]
        for key, value in self.as_pairs():
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"


def scan(kg: KnowledgeGraph) -> OrcReport:
    present = kg.triple_set
    participating: set[Triple] = set()

    self_loops = 0
    for t in kg.triples:
        if t.head == t.tail:
            self_loops += 1
            participating.add(t)

    symmetric = 0
    for h, r, t in kg.triples:
        if h < t and Triple(t, r, h) in present:
            symmetric += 1
            participating.add(Triple(h, r, t))
            participating.add(Triple(t, r, h))

    succ: dict[tuple[int, int], list[int]] = {}
    for h, r, t in kg.triples:
        succ.setdefault((r, h), []).append(t)

    triangles = 0
    for a, r, b in kg.triples:
        if a == b:
            continue
        for c in succ.get((r, b), ()):
            if c == a or c == b:
                continue
            if Triple(a, r, c) in present:
                triangles += 1
                participating.add(Triple(a, r, b))
                participating.add(Triple(b, r, c))
                participating.add(Triple(a, r, c))

    return OrcReport(n_triples=kg.n_triples, symmetric_pairs=symmetric,
                     self_loops=self_loops, transitive_triangles=triangles,
                     participating_triples=len(participating))
