"""Acceptance: the produced file feeds the primary pipeline end to end."""

from desc_embedder import HashEncoder
from desc_embedder.cli import main as embed_main


def test_c10_round_trip_into_primary(tmp_path, capsys):
    """A 3-entity description file becomes a sentence-vector file the primary
    reader parses (header dim matching every row), and the primary trains one
    epoch on it without error."""
    ndrl = __import__("ndrl")

    desc = tmp_path / "descriptions.tsv"
    desc.write_text(
        "array\tAn ordered collection of items. Every item has an index.\n"
        "stack\t后进先出的线性表。支持压入和弹出。\n"
        "queue\tFirst in, first out\n")

    vectors = tmp_path / "vectors.tsv"
    code = embed_main([str(desc), str(vectors), "--backend", "hash",
                       "--dim", "12"])
    assert code == 0
    assert "wrote 5 sentence vector(s)" in capsys.readouterr().out

    lines = vectors.read_text().splitlines()
    assert lines[0] == "#dim 12"
    for line in lines[1:]:
        assert len(line.split("\t")[2].split(",")) == 12

    kg = ndrl.KnowledgeGraph(
        ["array", "stack", "queue"], ["relate"],
        [(0, 0, 1), (1, 0, 2), (2, 0, 0)])
    bank = ndrl.read_sentence_vectors(vectors, kg)
    assert bank.dim == 12
    assert len(bank) == 3
    assert bank.skipped_labels == 0

    cfg = ndrl.TrainConfig(dim=6, heads=2, layers=1, epochs=1, batch=4,
                           seed=0, transe_epochs=5)
    ckpt = ndrl.train(kg, cfg, bank=bank)
    assert ckpt.epoch == 1
    assert len(ckpt.losses) == 1
    assert ckpt.params.desc is not None
    print("\nPASS C10 secondary round trip: 5 vector rows at dim 12, primary "
          "trained 1 epoch with the description branch active")
