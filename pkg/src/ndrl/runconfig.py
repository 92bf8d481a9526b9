"""Flat key=value run configuration.

Config files hold one ``key=value`` per line; ``#`` comments and blank lines
are skipped.  The key set is closed: anything outside the registry is
rejected so typos fail loudly instead of silently training with defaults.
Command-line ``--key=value`` overrides win over the file, which wins over
the registry defaults.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError, FileFormatError

# key -> default (None marks keys that have no default and are required by
# whichever subcommand consumes them)
REGISTRY: dict[str, str | None] = {
    "data.triples": None,
    "data.descriptions": None,
    "data.embeddings": None,
    "split.ratios": "7:1.5:1.5",
    "split.seed": "7",
    "model.dim": "100",
    "model.heads": "2",
    "model.layers": "2",
    "model.rho": "0.5",
    "model.hidden_dim": "0",
    "model.out_dim": "0",
    "model.slope": "0.2",
    "model.include_inverse": "true",
    "train.lr": "0.004",
    "train.batch": "512",
    "train.epochs": "100",
    "train.margin": "1.0",
    "train.l2": "1e-5",
    "train.seed": "11",
    "train.negatives": "1",
    "train.gate_in_training": "false",
    "train.corrupt_relation": "false",
    "richness.k": "0.5",
    "richness.threshold": "12",
    "ablation.use_relation": "true",
    "ablation.desc_mode": "attention",
    "ablation.richness_gate": "true",
    "transe.lr": "0.01",
    "transe.margin": "1.0",
    "transe.epochs": "500",
    "transe.batch": "128",
    "transe.seed": "7",
    "gen.entities": "300",
    "gen.relations": "3",
    "gen.extra_edges": "0",
    "gen.relate_edges": "0",
    "gen.symmetric_fraction": "0.0",
    "gen.seed": "0",
    "gen.desc_coverage": "0.0",
    "gen.desc_dim": "16",
    "gen.desc_max_sentences": "4",
    "gen.desc_seed": "0",
    "eval.split": "test",
    "out.checkpoint": None,
    "out.report": None,
    "out.log": None,
}


def defaults() -> dict[str, str]:
    return {k: v for k, v in REGISTRY.items() if v is not None}


def validate(cfg: dict[str, str]) -> None:
    unknown = sorted(k for k in cfg if k not in REGISTRY)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")


def load_config(path) -> dict[str, str]:
    path = Path(path)
    cfg: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FileFormatError(f"expected key=value, got {line!r}",
                                      path=path, line=no)
            key, value = line.split("=", 1)
            key, value = key.strip(), value.strip()
            if not key:
                raise FileFormatError("empty key", path=path, line=no)
            if key in cfg:
                raise FileFormatError(f"duplicate key {key!r}", path=path, line=no)
            cfg[key] = value
    validate(cfg)
    return cfg


def parse_override(arg: str) -> tuple[str, str]:
    """'--key=value' (or bare 'key=value') from the command line."""
    body = arg[2:] if arg.startswith("--") else arg
    if "=" not in body:
        raise ConfigError(f"override {arg!r} is not of the form --key=value")
    key, value = body.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"override {arg!r} has an empty key")
    return key, value.strip()


def merge(file_cfg: dict[str, str] | None,
          overrides: dict[str, str] | None = None) -> dict[str, str]:
    cfg = defaults()
    if file_cfg:
        cfg.update(file_cfg)
    if overrides:
        cfg.update(overrides)
    validate(cfg)
    return cfg


def require(cfg: dict[str, str], key: str) -> str:
    if key not in cfg or not cfg[key]:
        raise ConfigError(f"missing required config key {key}")
    return cfg[key]


def get_int(cfg: dict[str, str], key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {cfg[key]!r}") from None


def get_float(cfg: dict[str, str], key: str) -> float:
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {cfg[key]!r}") from None


def get_bool(cfg: dict[str, str], key: str) -> bool:
    low = cfg[key].strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {cfg[key]!r}")


def get_ratios(cfg: dict[str, str], key: str = "split.ratios") -> tuple[float, float, float]:
    parts = cfg[key].split(":")
    if len(parts) != 3:
        raise ConfigError(f"{key} must be train:valid:test, got {cfg[key]!r}")
    try:
        a, b, c = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{key} has a non-numeric part: {cfg[key]!r}") from None
    if min(a, b, c) < 0 or a + b + c <= 0:
        raise ConfigError(f"{key} parts must be nonnegative with a positive sum")
    return a, b, c
