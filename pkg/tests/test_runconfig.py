import pytest

from ndrl.errors import ConfigError, FileFormatError
from ndrl.runconfig import (defaults, get_bool, get_float, get_int, get_ratios,
                            load_config, merge, parse_override, require,
                            validate)


class TestDefaults:
    def test_stock_recipe_values(self):
        cfg = defaults()
        assert cfg["train.lr"] == "0.004"
        assert cfg["train.margin"] == "1.0"
        assert cfg["train.batch"] == "512"
        assert cfg["richness.k"] == "0.5"
        assert cfg["richness.threshold"] == "12"
        assert cfg["split.ratios"] == "7:1.5:1.5"

    def test_required_keys_left_unset(self):
        cfg = defaults()
        assert "data.triples" not in cfg
        assert "out.checkpoint" not in cfg

    def test_defaults_validate_clean(self):
        validate(defaults())


class TestValidate:
    def test_unknown_key_is_named(self):
        with pytest.raises(ConfigError) as exc:
            validate({"train.lr": "0.1", "train.velocity": "9"})
        assert "train.velocity" in str(exc.value)

    def test_known_per_use_keys_accepted(self):
        validate({"data.triples": "graph.tsv", "out.checkpoint": "ck.txt"})


class TestLoadConfig:
    def test_basic_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# a comment\n"
                        "train.lr = 0.01\n"
                        "\n"
                        "split.seed=3\n")
        cfg = load_config(path)
        assert cfg == {"train.lr": "0.01", "split.seed": "3"}

    def test_missing_equals_reports_line(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("train.lr 0.01\n")
        with pytest.raises(FileFormatError) as exc:
            load_config(path)
        assert exc.value.line == 1

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("train.lr=0.01\ntrain.lr=0.02\n")
        with pytest.raises(FileFormatError) as exc:
            load_config(path)
        assert exc.value.line == 2

    def test_empty_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("=5\n")
        with pytest.raises(FileFormatError):
            load_config(path)


class TestMerge:
    def test_precedence_defaults_file_overrides(self):
        merged = merge({"train.lr": "0.5"}, {})
        assert merged["train.lr"] == "0.5"
        assert merged["train.margin"] == "1.0"  # untouched default
        merged = merge({"train.lr": "0.5"}, {"train.lr": "0.9"})
        assert merged["train.lr"] == "0.9"

    def test_none_file_section(self):
        merged = merge(None, {"train.epochs": "3"})
        assert merged["train.epochs"] == "3"

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigError):
            merge(None, {"nope.key": "1"})


class TestParseOverride:
    def test_well_formed(self):
        assert parse_override("--train.lr=0.02") == ("train.lr", "0.02")

    def test_value_may_contain_equals(self):
        key, value = parse_override("--out.report=a=b.txt")
        assert key == "out.report" and value == "a=b.txt"

    def test_bare_form_accepted(self):
        assert parse_override("train.lr=0.02") == ("train.lr", "0.02")

    @pytest.mark.parametrize("arg", ["--train.lr", "--=5"])
    def test_malformed(self, arg):
        with pytest.raises(ConfigError):
            parse_override(arg)


class TestAccessors:
    def test_require(self):
        assert require({"data.triples": "g.tsv"}, "data.triples") == "g.tsv"
        with pytest.raises(ConfigError) as exc:
            require({}, "data.triples")
        assert "data.triples" in str(exc.value)

    def test_get_int(self):
        assert get_int({"train.epochs": "40"}, "train.epochs") == 40
        with pytest.raises(ConfigError):
            get_int({"train.epochs": "4.5"}, "train.epochs")

    def test_get_float(self):
        assert get_float({"train.lr": "4e-3"}, "train.lr") == 0.004
        with pytest.raises(ConfigError):
            get_float({"train.lr": "fast"}, "train.lr")

    def test_get_bool(self):
        assert get_bool({"k": "true"}, "k") is True
        assert get_bool({"k": "false"}, "k") is False
        with pytest.raises(ConfigError):
            get_bool({"k": "yep"}, "k")

    def test_get_ratios(self):
        cfg = {"split.ratios": "7:1.5:1.5"}
        assert get_ratios(cfg) == (7.0, 1.5, 1.5)

    @pytest.mark.parametrize("raw", ["7:1.5", "7:1.5:1.5:1", "a:b:c",
                                     "-1:1:1", "0:0:0"])
    def test_bad_ratios(self, raw):
        with pytest.raises(ConfigError):
            get_ratios({"split.ratios": raw})
