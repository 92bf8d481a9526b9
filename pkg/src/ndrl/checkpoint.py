"""Plain-text checkpoints.

Layout, in order:

    #embeddings entities=<n> relations=<m> dim=<d>
    <n entity rows, then m relation rows; comma-separated %.16e>
    #matrix <name> rows=<r> cols=<c>     (zero or more, canonical order)
    <r rows>
    #config                              (optional)
    key=value
    #epoch <e>                           (optional)
    #losses <comma-separated floats>     (optional)

A file holding only the #embeddings block is a valid plain table, which is
what the TransE pretrainer emits.  %.16e keeps float64 exact across a round
trip.  Vectors are stored as single-row matrices and restored by name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .descriptions import DescAttentionParams
from .errors import CheckpointFormatError
from .gat import DEFAULT_SLOPE, GatLayerParams, GatParams
from .model import ModelParams, iter_params
from .transe import EmbeddingTable

def _is_vector(name: str) -> bool:
    return name.endswith(".z") or name == "desc.attn_z"


@dataclass
class Checkpoint:
    params: object  # EmbeddingTable or ModelParams
    config: dict[str, str] = field(default_factory=dict)
    epoch: int = 0
    losses: list[float] = field(default_factory=list)


def _fmt_row(row: np.ndarray) -> str:
    return ",".join(f"{x:.16e}" for x in np.atleast_1d(row))


def _write_matrix_rows(fh, arr: np.ndarray) -> None:
    for row in np.atleast_2d(arr):
        fh.write(_fmt_row(row) + "\n")


def save_embeddings(path, table: EmbeddingTable) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        _write_embedding_block(fh, table)


def _write_embedding_block(fh, table: EmbeddingTable) -> None:
    fh.write(f"#embeddings entities={table.entities.shape[0]} "
             f"relations={table.relations.shape[0]} dim={table.dim}\n")
    _write_matrix_rows(fh, table.entities)
    _write_matrix_rows(fh, table.relations)


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    params = ckpt.params
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if isinstance(params, EmbeddingTable):
            _write_embedding_block(fh, params)
        else:
            _write_embedding_block(fh, params.embeddings)
            for name, arr in iter_params(params):
                if name.startswith("embeddings."):
                    continue
                mat = np.atleast_2d(arr)
                fh.write(f"#matrix {name} rows={mat.shape[0]} cols={mat.shape[1]}\n")
                _write_matrix_rows(fh, mat)
        if ckpt.config:
            fh.write("#config\n")
            for key in sorted(ckpt.config):
                fh.write(f"{key}={ckpt.config[key]}\n")
        fh.write(f"#epoch {ckpt.epoch}\n")
        if ckpt.losses:
            fh.write("#losses " + ",".join(f"{x:.16e}" for x in ckpt.losses) + "\n")


def _parse_kv_header(parts: list[str], path, no: int) -> dict[str, str]:
    out = {}
    for part in parts:
        if "=" not in part:
            raise CheckpointFormatError(f"malformed header field {part!r}",
                                        path=path, line=no)
        key, value = part.split("=", 1)
        out[key] = value
    return out


def _parse_row(line: str, cols: int, path, no: int) -> np.ndarray:
    try:
        row = np.array([float(x) for x in line.split(",")], dtype=np.float64)
    except ValueError:
        raise CheckpointFormatError("bad float in matrix row",
                                    path=path, line=no) from None
    if row.shape[0] != cols:
        raise CheckpointFormatError(
            f"row has {row.shape[0]} values, expected {cols}", path=path, line=no)
    return row


class _Reader:
    def __init__(self, path):
        self.path = Path(path)
        with open(self.path, encoding="utf-8") as fh:
            self.lines = fh.read().splitlines()
        self.pos = 0

    def peek(self):
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def take(self):
        line = self.lines[self.pos]
        self.pos += 1
        return line

    @property
    def lineno(self) -> int:
        return self.pos + 1

    def read_rows(self, count: int, cols: int) -> np.ndarray:
        rows = np.empty((count, cols), dtype=np.float64)
        for i in range(count):
            if self.peek() is None or self.peek().startswith("#"):
                raise CheckpointFormatError(
                    f"expected {count} rows, found {i}",
                    path=self.path, line=self.lineno)
            rows[i] = _parse_row(self.take(), cols, self.path, self.lineno - 1)
        return rows


def _load_blocks(path):
    rd = _Reader(path)
    line = rd.peek()
    if line is None or not line.startswith("#embeddings"):
        raise CheckpointFormatError("file must start with an #embeddings header",
                                    path=path, line=1)
    head = _parse_kv_header(rd.take().split()[1:], path, 1)
    try:
        n_ent = int(head["entities"])
        n_rel = int(head["relations"])
        dim = int(head["dim"])
    except (KeyError, ValueError):
        raise CheckpointFormatError(
            "header needs integer entities=, relations=, dim=",
            path=path, line=1) from None
    if n_ent < 1 or n_rel < 1 or dim < 1:
        raise CheckpointFormatError("header counts must be positive",
                                    path=path, line=1)
    table = EmbeddingTable(rd.read_rows(n_ent, dim), rd.read_rows(n_rel, dim))

    matrices: dict[str, np.ndarray] = {}
    config: dict[str, str] = {}
    epoch = 0
    losses: list[float] = []
    while rd.peek() is not None:
        no = rd.lineno
        line = rd.take()
        if not line.strip():
            continue
        if line.startswith("#matrix "):
            parts = line.split()
            if len(parts) != 4:
                raise CheckpointFormatError("malformed #matrix header",
                                            path=path, line=no)
            name = parts[1]
            meta = _parse_kv_header(parts[2:], path, no)
            try:
                r, c = int(meta["rows"]), int(meta["cols"])
            except (KeyError, ValueError):
                raise CheckpointFormatError("matrix header needs rows= and cols=",
                                            path=path, line=no) from None
            if name in matrices:
                raise CheckpointFormatError(f"duplicate matrix {name!r}",
                                            path=path, line=no)
            arr = rd.read_rows(r, c)
            matrices[name] = arr[0] if _is_vector(name) else arr
        elif line.startswith("#config"):
            while rd.peek() is not None and not rd.peek().startswith("#"):
                kv = rd.take()
                if not kv.strip():
                    continue
                if "=" not in kv:
                    raise CheckpointFormatError(f"malformed config line {kv!r}",
                                                path=path, line=rd.lineno - 1)
                key, value = kv.split("=", 1)
                config[key.strip()] = value.strip()
        elif line.startswith("#epoch"):
            try:
                epoch = int(line.split()[1])
            except (IndexError, ValueError):
                raise CheckpointFormatError("malformed #epoch line",
                                            path=path, line=no) from None
        elif line.startswith("#losses"):
            body = line[len("#losses"):].strip()
            try:
                losses = [float(x) for x in body.split(",")] if body else []
            except ValueError:
                raise CheckpointFormatError("malformed #losses line",
                                            path=path, line=no) from None
        else:
            raise CheckpointFormatError(f"unexpected line {line!r}",
                                        path=path, line=no)
    return table, matrices, config, epoch, losses


def _assemble_model(table: EmbeddingTable, matrices: dict[str, np.ndarray],
                    config: dict[str, str], path) -> ModelParams:
    slope = float(config.get("model.slope", DEFAULT_SLOPE))
    rho = float(config.get("model.rho", 0.5))
    layer_ids = sorted({int(n.split(".")[1][len("layer"):])
                        for n in matrices if n.startswith("gat.layer")})
    if layer_ids != list(range(len(layer_ids))) or not layer_ids:
        raise CheckpointFormatError("attention layers are not contiguous from 0",
                                    path=path)
    layers, rel_transforms = [], []
    for i in layer_ids:
        prefix = f"gat.layer{i}.head"
        head_ids = sorted({int(n[len(prefix):].split(".")[0])
                           for n in matrices if n.startswith(prefix)})
        weights, attn = [], []
        for k in head_ids:
            try:
                weights.append(matrices[f"gat.layer{i}.head{k}.w"])
                attn.append(matrices[f"gat.layer{i}.head{k}.z"])
            except KeyError as exc:
                raise CheckpointFormatError(f"missing matrix {exc}",
                                            path=path) from None
        if f"gat.layer{i}.rel_w" not in matrices:
            raise CheckpointFormatError(f"missing matrix gat.layer{i}.rel_w",
                                        path=path)
        layers.append(GatLayerParams(weights=weights, attn=attn, slope=slope))
        rel_transforms.append(matrices[f"gat.layer{i}.rel_w"])
    if "gat.ent_w" not in matrices:
        raise CheckpointFormatError("missing matrix gat.ent_w", path=path)
    gat = GatParams(layers=layers, rel_transforms=rel_transforms,
                    ent_residual=matrices["gat.ent_w"], rho=rho)
    desc = None
    desc_names = [n for n in matrices if n.startswith("desc.")]
    if desc_names:
        try:
            desc = DescAttentionParams(proj=matrices["desc.proj"],
                                       attn_w=matrices["desc.attn_w"],
                                       attn_z=matrices["desc.attn_z"],
                                       slope=slope)
        except KeyError as exc:
            raise CheckpointFormatError(f"missing matrix {exc}",
                                        path=path) from None
    return ModelParams(embeddings=table, gat=gat, desc=desc)


def load_embeddings(path) -> EmbeddingTable:
    table, matrices, _, _, _ = _load_blocks(path)
    if matrices:
        raise CheckpointFormatError(
            "file carries model matrices; load it as a checkpoint", path=path)
    return table


def load_checkpoint(path) -> Checkpoint:
    table, matrices, config, epoch, losses = _load_blocks(path)
    if not matrices:
        raise CheckpointFormatError(
            "no model matrices found; load it as plain embeddings", path=path)
    params = _assemble_model(table, matrices, config, path)
    return Checkpoint(params=params, config=config, epoch=epoch, losses=losses)


def load_any(path) -> Checkpoint:
    """Checkpoint from either format; plain tables get an empty config."""
    table, matrices, config, epoch, losses = _load_blocks(path)
    if matrices:
        params = _assemble_model(table, matrices, config, path)
    else:
        params = table
    return Checkpoint(params=params, config=config, epoch=epoch, losses=losses)
