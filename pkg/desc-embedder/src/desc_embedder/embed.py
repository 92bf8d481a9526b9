"""Description records in, sentence-vector file out."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import InputFormatError
from .segment import split_sentences


@dataclass(frozen=True)
class DescriptionRecord:
    label: str
    text: str


def read_description_records(path) -> list[DescriptionRecord]:
    """``entity_label<TAB>description`` lines; comments and blanks skipped."""
    path = Path(path)
    records: list[DescriptionRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise InputFormatError(
                    "expected entity_label<TAB>description", path=path, line=no)
            label, text = line.split("\t", 1)
            label = label.strip()
            if not label:
                raise InputFormatError("empty entity label", path=path, line=no)
            if label in seen:
                raise InputFormatError(f"duplicate entity label {label!r}",
                                       path=path, line=no)
            seen.add(label)
            records.append(DescriptionRecord(label, text))
    return records


def embed_records(records: list[DescriptionRecord], encoder, out_path) -> int:
    """Write the sentence-vector file; returns the number of vector rows.

    Entities whose description segments to zero sentences are omitted, and
    the output order follows the input order.
    """
    rows = 0
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#dim {encoder.dim}\n")
        for record in records:
            sentences = split_sentences(record.text)
            if not sentences:
                continue
            vectors = encoder.encode(sentences)
            if vectors.shape != (len(sentences), encoder.dim):
                raise InputFormatError(
                    f"encoder returned {vectors.shape}, expected "
                    f"({len(sentences)}, {encoder.dim})")
            for idx, vec in enumerate(vectors):
                body = ",".join(f"{x:.16e}" for x in vec)
                fh.write(f"{record.label}\t{idx}\t{body}\n")
                rows += 1
    return rows


def embed_file(in_path, encoder, out_path) -> int:
    return embed_records(read_description_records(in_path), encoder, out_path)
