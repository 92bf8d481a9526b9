"""End-to-end command tests, run in process through cli.main(argv)."""

import numpy as np
import pytest

from ndrl.cli import main
from ndrl.kg import load_triples


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def workdir(tmp_path):
    return tmp_path


def gen_args(workdir, entities=24, coverage=0.0, **extra):
    args = ["generate",
            f"--data.triples={workdir / 'graph.tsv'}",
            f"--gen.entities={entities}",
            "--gen.extra_edges=10",
            "--gen.relate_edges=8",
            "--gen.symmetric_fraction=0.5",
            "--gen.seed=3"]
    if coverage > 0:
        args += [f"--gen.desc_coverage={coverage}",
                 "--gen.desc_dim=6",
                 f"--data.descriptions={workdir / 'desc.tsv'}"]
    for key, value in extra.items():
        args.append(f"--{key}={value}")
    return args


TRAIN_FAST = ["--model.dim=8", "--model.heads=2", "--model.layers=1",
              "--train.epochs=3", "--train.batch=16", "--transe.epochs=8"]


class TestGenerate:
    def test_writes_loadable_graph(self, workdir, capsys):
        code, out, _ = run(capsys, *gen_args(workdir))
        assert code == 0
        assert "wrote" in out
        kg = load_triples(workdir / "graph.tsv")
        assert kg.n_entities == 24

    def test_writes_description_bank_when_asked(self, workdir, capsys):
        code, out, _ = run(capsys, *gen_args(workdir, coverage=0.5))
        assert code == 0
        assert "sentence vectors" in out
        first = (workdir / "desc.tsv").read_text().splitlines()[0]
        assert first == "#dim 6"


class TestShowConfig:
    def test_prints_merged_sorted_pairs(self, workdir, capsys):
        code, out, _ = run(capsys, "train", "--show-config",
                           "--train.lr=0.25")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines == sorted(lines)
        assert "train.lr=0.25" in lines
        assert "train.margin=1.0" in lines

    def test_config_file_merging(self, workdir, capsys):
        cfg = workdir / "run.cfg"
        cfg.write_text("train.lr=0.5\ntrain.epochs=2\n")
        code, out, _ = run(capsys, "train", "--show-config",
                           f"--config={cfg}", "--train.lr=0.9")
        assert code == 0
        assert "train.lr=0.9" in out       # override beats file
        assert "train.epochs=2" in out     # file beats default


class TestPretrain:
    def test_writes_plain_embedding_table(self, workdir, capsys):
        run(capsys, *gen_args(workdir))
        code, out, _ = run(capsys, "pretrain",
                           f"--data.triples={workdir / 'graph.tsv'}",
                           f"--out.checkpoint={workdir / 'emb.txt'}",
                           "--model.dim=8", "--transe.epochs=10")
        assert code == 0
        assert "pretrained" in out
        head = (workdir / "emb.txt").read_text().splitlines()[0]
        assert head.startswith("#embeddings entities=24")


class TestTrain:
    def test_full_run_writes_checkpoint_and_log(self, workdir, capsys):
        run(capsys, *gen_args(workdir, coverage=0.5))
        code, out, _ = run(capsys, "train",
                           f"--data.triples={workdir / 'graph.tsv'}",
                           f"--data.descriptions={workdir / 'desc.tsv'}",
                           f"--out.checkpoint={workdir / 'ck.txt'}",
                           f"--out.log={workdir / 'train.log'}",
                           *TRAIN_FAST)
        assert code == 0
        assert "trained 3 epoch(s)" in out
        text = (workdir / "ck.txt").read_text()
        assert text.startswith("#embeddings")
        assert "#matrix desc.proj" in text
        log_rows = (workdir / "train.log").read_text().strip().splitlines()
        assert len(log_rows) == 3
        for row in log_rows:
            epoch, loss, wall = row.split("\t")
            int(epoch), float(loss), float(wall)

    def test_warm_start_from_pretrained_table(self, workdir, capsys):
        run(capsys, *gen_args(workdir))
        run(capsys, "pretrain",
            f"--data.triples={workdir / 'graph.tsv'}",
            f"--out.checkpoint={workdir / 'emb.txt'}",
            "--model.dim=8", "--transe.epochs=10")
        code, out, _ = run(capsys, "train",
                           f"--data.triples={workdir / 'graph.tsv'}",
                           f"--data.embeddings={workdir / 'emb.txt'}",
                           f"--out.checkpoint={workdir / 'ck.txt'}",
                           *TRAIN_FAST)
        assert code == 0
        assert (workdir / "ck.txt").exists()


class TestEval:
    def prepare(self, workdir, capsys, coverage=0.5):
        run(capsys, *gen_args(workdir, coverage=coverage))
        args = ["train",
                f"--data.triples={workdir / 'graph.tsv'}",
                f"--out.checkpoint={workdir / 'ck.txt'}", *TRAIN_FAST]
        if coverage > 0:
            args.insert(2, f"--data.descriptions={workdir / 'desc.tsv'}")
        code, _, _ = run(capsys, *args)
        assert code == 0

    def test_report_written_and_echoed(self, workdir, capsys):
        self.prepare(workdir, capsys)
        code, out, _ = run(capsys, "eval",
                           f"--out.checkpoint={workdir / 'ck.txt'}",
                           f"--out.report={workdir / 'report.txt'}")
        assert code == 0
        assert (workdir / "report.txt").read_text() == out
        assert "hits10.filtered=" in out

    def test_paths_recovered_from_checkpoint_config(self, workdir, capsys):
        # eval only names the checkpoint; data.* travels inside it
        self.prepare(workdir, capsys)
        code, out, _ = run(capsys, "eval",
                           f"--out.checkpoint={workdir / 'ck.txt'}")
        assert code == 0
        assert "mr.filtered=" in out

    def test_plain_checkpoint_ignores_descriptions_with_note(self, workdir,
                                                             capsys):
        self.prepare(workdir, capsys, coverage=0.0)
        code, out, err = run(capsys, "eval",
                             f"--out.checkpoint={workdir / 'ck.txt'}",
                             f"--data.descriptions={workdir / 'none.tsv'}")
        assert code == 0
        assert "ignored" in err

    def test_eval_on_pretrained_table(self, workdir, capsys):
        run(capsys, *gen_args(workdir))
        run(capsys, "pretrain",
            f"--data.triples={workdir / 'graph.tsv'}",
            f"--out.checkpoint={workdir / 'emb.txt'}",
            "--model.dim=8", "--transe.epochs=10")
        code, out, _ = run(capsys, "eval",
                           f"--out.checkpoint={workdir / 'emb.txt'}",
                           f"--data.triples={workdir / 'graph.tsv'}",
                           "--ablation.richness_gate=false")
        assert code == 0
        assert "mr.raw=" in out


class TestRichness:
    def test_all_entities_with_footer(self, workdir, capsys):
        run(capsys, *gen_args(workdir))
        code, out, _ = run(capsys, "richness",
                           f"--data.triples={workdir / 'graph.tsv'}")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[1] == "entity\trichness\tgate"
        assert lines[-1].startswith("# rich ")
        assert len(lines) == 24 + 3

    def test_entity_filter_and_verdict(self, workdir, capsys):
        run(capsys, *gen_args(workdir))
        code, out, _ = run(capsys, "richness",
                           f"--data.triples={workdir / 'graph.tsv'}",
                           "--entity=e0", "--richness.threshold=0")
        assert code == 0
        rows = [l for l in out.splitlines() if l.startswith("e0\t")]
        assert len(rows) == 1
        assert rows[0].endswith("rich")

    def test_unknown_label_fails_clean(self, workdir, capsys):
        run(capsys, *gen_args(workdir))
        code, _, err = run(capsys, "richness",
                           f"--data.triples={workdir / 'graph.tsv'}",
                           "--entity=bogus")
        assert code == 3
        assert "bogus" in err


class TestOrcScan:
    def test_counts_planted_pairs(self, workdir, capsys):
        run(capsys, *gen_args(workdir))
        code, out, _ = run(capsys, "orc-scan",
                           f"--data.triples={workdir / 'graph.tsv'}")
        assert code == 0
        assert "symmetric_pairs=4" in out


class TestExitCodes:
    def test_missing_input_file(self, workdir, capsys):
        code, _, err = run(capsys, "orc-scan",
                           f"--data.triples={workdir / 'missing.tsv'}")
        assert code == 2
        assert "missing file" in err

    def test_unknown_config_key(self, workdir, capsys):
        code, _, err = run(capsys, "train", "--train.velocity=9")
        assert code == 3
        assert "train.velocity" in err

    def test_malformed_config_file(self, workdir, capsys):
        bad = workdir / "bad.cfg"
        bad.write_text("no equals sign here\n")
        code, _, err = run(capsys, "train", f"--config={bad}",
                           "--show-config")
        assert code == 3

    def test_divergence(self, workdir, capsys):
        run(capsys, *gen_args(workdir))
        code, _, err = run(capsys, "train",
                           f"--data.triples={workdir / 'graph.tsv'}",
                           f"--out.checkpoint={workdir / 'ck.txt'}",
                           *TRAIN_FAST, "--train.lr=1e150")
        assert code == 4
        assert "diverged" in err.lower()


class TestAblate:
    def test_report_rows_and_determinism(self, workdir, capsys):
        run(capsys, *gen_args(workdir, entities=20, coverage=0.6))
        args = ["ablate",
                f"--data.triples={workdir / 'graph.tsv'}",
                f"--data.descriptions={workdir / 'desc.tsv'}",
                f"--out.checkpoint={workdir / 'ab.txt'}",
                f"--out.report={workdir / 'ab_report.txt'}",
                *TRAIN_FAST, "--train.epochs=2"]
        code, out, _ = run(capsys, *args)
        assert code == 0
        lines = out.splitlines()
        names = [l.split()[0] for l in lines[1:5]]
        assert names == ["NDRL-r", "NDRL-a", "NDRL-s", "NDRL"]
        for variant in names:
            assert (workdir / f"ab.txt.{variant}.txt").exists()
            assert f"{variant}.hits10.filtered=" in out
        first = (workdir / "ab_report.txt").read_bytes()
        code, _, _ = run(capsys, *args)
        assert code == 0
        assert (workdir / "ab_report.txt").read_bytes() == first
