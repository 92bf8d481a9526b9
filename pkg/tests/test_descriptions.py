import numpy as np
import pytest

from ndrl.descriptions import (DescAttentionParams, DescriptionBank,
                               aggregate_description, backward_attention,
                               backward_mean, entity_description,
                               init_desc_params, mean_description, random_bank,
                               read_sentence_vectors, write_sentence_vectors)
from ndrl.errors import (ConfigError, FileFormatError, MissingDescriptionError,
                         ShapeError)
from ndrl.kg import generate_synthetic


def simple_params(source_dim=3, out_dim=2, attn_dim=2, seed=0):
    return init_desc_params(np.random.default_rng(seed), source_dim, out_dim,
                            attn_dim=attn_dim)


class TestBank:
    def test_lookup_and_len(self):
        bank = DescriptionBank(3, {0: np.ones((2, 3))})
        assert len(bank) == 1
        assert 0 in bank
        assert 1 not in bank
        assert bank.get(0).shape == (2, 3)
        assert bank.get(1) is None

    def test_entities_sorted(self):
        bank = DescriptionBank(2, {4: np.ones((1, 2)), 1: np.ones((1, 2))})
        assert bank.entities() == [1, 4]


class TestFileFormat:
    def test_round_trip_is_exact(self, tmp_path, rng):
        kg = generate_synthetic(6, seed=0)
        bank = random_bank(kg, dim=4, coverage=1.0, max_sentences=3, seed=5)
        path = tmp_path / "vec.tsv"
        write_sentence_vectors(path, kg, bank)
        loaded = read_sentence_vectors(path, kg)
        assert loaded.dim == 4
        assert loaded.entities() == bank.entities()
        for e in bank.entities():
            assert np.array_equal(loaded.get(e), bank.get(e))

    def test_unknown_labels_skipped_and_tallied(self, tmp_path):
        kg = generate_synthetic(3, seed=0)
        path = tmp_path / "vec.tsv"
        path.write_text("#dim 2\n"
                        "e0\t0\t1.0,2.0\n"
                        "ghost\t0\t3.0,4.0\n"
                        "e1\t0\t5.0,6.0\n")
        bank = read_sentence_vectors(path, kg)
        assert bank.entities() == [kg.entity_ids["e0"], kg.entity_ids["e1"]]
        assert bank.skipped_labels == 1

    def test_missing_header(self, tmp_path):
        kg = generate_synthetic(3, seed=0)
        path = tmp_path / "vec.tsv"
        path.write_text("e0\t0\t1.0,2.0\n")
        with pytest.raises(FileFormatError):
            read_sentence_vectors(path, kg)

    def test_empty_file(self, tmp_path):
        kg = generate_synthetic(3, seed=0)
        path = tmp_path / "vec.tsv"
        path.write_text("")
        with pytest.raises(FileFormatError):
            read_sentence_vectors(path, kg)

    def test_wrong_component_count(self, tmp_path):
        kg = generate_synthetic(3, seed=0)
        path = tmp_path / "vec.tsv"
        path.write_text("#dim 3\ne0\t0\t1.0,2.0\n")
        with pytest.raises(FileFormatError) as exc:
            read_sentence_vectors(path, kg)
        assert "2" in str(exc.value)

    def test_duplicate_index(self, tmp_path):
        kg = generate_synthetic(3, seed=0)
        path = tmp_path / "vec.tsv"
        path.write_text("#dim 1\ne0\t0\t1.0\ne0\t0\t2.0\n")
        with pytest.raises(FileFormatError):
            read_sentence_vectors(path, kg)

    def test_gap_in_indices(self, tmp_path):
        kg = generate_synthetic(3, seed=0)
        path = tmp_path / "vec.tsv"
        path.write_text("#dim 1\ne0\t0\t1.0\ne0\t2\t2.0\n")
        with pytest.raises(FileFormatError):
            read_sentence_vectors(path, kg)

    def test_bad_float(self, tmp_path):
        kg = generate_synthetic(3, seed=0)
        path = tmp_path / "vec.tsv"
        path.write_text("#dim 1\ne0\t0\tpotato\n")
        with pytest.raises(FileFormatError) as exc:
            read_sentence_vectors(path, kg)
        assert exc.value.line == 2

    def test_negative_index(self, tmp_path):
        kg = generate_synthetic(3, seed=0)
        path = tmp_path / "vec.tsv"
        path.write_text("#dim 1\ne0\t-1\t1.0\n")
        with pytest.raises(FileFormatError):
            read_sentence_vectors(path, kg)


class TestRandomBank:
    def test_coverage_count(self):
        kg = generate_synthetic(20, seed=0)
        bank = random_bank(kg, dim=3, coverage=0.6, max_sentences=2, seed=1)
        assert len(bank) == 12

    def test_deterministic(self):
        kg = generate_synthetic(10, seed=0)
        a = random_bank(kg, dim=3, coverage=0.5, max_sentences=4, seed=9)
        b = random_bank(kg, dim=3, coverage=0.5, max_sentences=4, seed=9)
        assert sorted(a.entities()) == sorted(b.entities())
        for label in a.entities():
            assert np.array_equal(a.get(label), b.get(label))

    def test_sentence_count_bounds(self):
        kg = generate_synthetic(30, seed=0)
        bank = random_bank(kg, dim=2, coverage=1.0, max_sentences=3, seed=2)
        counts = {bank.get(label).shape[0] for label in bank.entities()}
        assert counts <= {1, 2, 3}
        assert max(counts) <= 3

    def test_coverage_bounds_checked(self):
        kg = generate_synthetic(5, seed=0)
        with pytest.raises(ConfigError):
            random_bank(kg, dim=2, coverage=1.5, max_sentences=2, seed=0)


class TestAttention:
    def test_single_sentence_weight_is_one(self, rng):
        params = simple_params()
        h = rng.normal(size=2)
        s = rng.normal(size=(1, 3))
        out = aggregate_description(h, s, params)
        assert np.allclose(out, s[0] @ params.proj, atol=1e-15)

    def test_identical_sentences_collapse(self, rng):
        params = simple_params()
        h = rng.normal(size=2)
        row = rng.normal(size=3)
        s = np.stack([row, row, row])
        out = aggregate_description(h, s, params)
        assert np.allclose(out, row @ params.proj, atol=1e-12)

    def test_weights_live_on_simplex(self, rng):
        params = simple_params(source_dim=4, out_dim=3, attn_dim=2, seed=3)
        cache = {}
        aggregate_description(rng.normal(size=3), rng.normal(size=(5, 4)),
                              params, cache=cache)
        alpha = cache["alpha"]
        assert alpha.shape == (5,)
        assert alpha.min() >= 0.0
        assert alpha.sum() == pytest.approx(1.0, abs=1e-12)

    def test_empty_sentences_rejected(self):
        params = simple_params()
        with pytest.raises(MissingDescriptionError):
            aggregate_description(np.zeros(2), np.zeros((0, 3)), params)

    def test_dim_mismatch(self):
        params = simple_params()
        with pytest.raises(ShapeError):
            aggregate_description(np.zeros(2), np.zeros((2, 4)), params)
        with pytest.raises(ShapeError):
            aggregate_description(np.zeros(3), np.zeros((2, 3)), params)

    def test_mean_mode(self, rng):
        params = simple_params()
        s = rng.normal(size=(4, 3))
        assert np.allclose(mean_description(s, params),
                           s.mean(axis=0) @ params.proj, atol=1e-15)

    def test_dispatcher(self, rng):
        params = simple_params()
        h = rng.normal(size=2)
        s = rng.normal(size=(3, 3))
        bank = DescriptionBank(3, {0: s})
        att = entity_description(bank, 0, h, params, mode="attention")
        mean = entity_description(bank, 0, h, params, mode="mean")
        assert att.present and mean.present
        assert np.allclose(att.vector, aggregate_description(h, s, params))
        assert np.allclose(mean.vector, mean_description(s, params))
        absent = entity_description(bank, 1, h, params)
        assert not absent.present and absent.vector is None
        no_bank = entity_description(None, 0, h, params)
        assert not no_bank.present
        with pytest.raises(ConfigError):
            entity_description(bank, 0, h, params, mode="median")


class TestBackward:
    """Finite-difference audit of the description gradients in isolation.

    Scalar objective: v . aggregate(h, S) for a fixed random v.
    """

    def run_fd(self, mode, seed):
        rng = np.random.default_rng(seed)
        params = init_desc_params(rng, 4, 3, attn_dim=2)
        h = rng.normal(size=3)
        s = rng.normal(size=(5, 4))
        v = rng.normal(size=3)
        step = 1e-6

        def loss(p, hq):
            if mode == "attention":
                return float(v @ aggregate_description(hq, s, p))
            return float(v @ mean_description(s, p))

        cache = {}
        if mode == "attention":
            aggregate_description(h, s, params, cache=cache)
            dproj, dw, dz, dh = backward_attention(params, cache, v)
            analytic = {"proj": dproj, "attn_w": dw, "attn_z": dz, "h": dh}
        else:
            mean_description(s, params, cache=cache)
            dproj = backward_mean(params, cache, v)
            analytic = {"proj": dproj}

        worst = 0.0
        for name, grad in analytic.items():
            if name == "h":
                base = h
            else:
                base = getattr(params, name)
            for idx in np.ndindex(base.shape):
                orig = base[idx]
                base[idx] = orig + step
                hi = loss(params, h)
                base[idx] = orig - step
                lo = loss(params, h)
                base[idx] = orig
                fd = (hi - lo) / (2 * step)
                ga = float(np.asarray(grad)[idx])
                err = abs(ga - fd) / max(abs(ga) + abs(fd), 1e-4)
                worst = max(worst, err)
        return worst

    def test_attention_gradients(self):
        assert self.run_fd("attention", seed=7) < 1e-4

    def test_mean_gradients(self):
        assert self.run_fd("mean", seed=8) < 1e-4
