"""Binary checkpoints and TSV embedding dumps.

Checkpoint layout (all little-endian)::

    header   4s magic "QKGE" | u16 version | u8 variant tag | u8 ncomp (4|8)
             | u8 reciprocal | u32 N | u32 M | u32 k
    payload  float32 entities (ncomp, N, k), relations (ncomp, M, k),
             then tail relations (ncomp, M, k) for DualRotation;
             coordinate-major: every a, then every b, ...
    footer   u64 checksum = blake2b-64 of the payload bytes

Coordinates are stored as float32; loading returns float64.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ChecksumError, DataError
from .model import EmbeddingTable, ModelVariant

MAGIC = b"QKGE"
VERSION = 1
HEADER = struct.Struct("<4sHBBBIII")
FOOTER = struct.Struct("<Q")


@dataclass(frozen=True)
class CheckpointInfo:
    variant: ModelVariant
    n_entities: int
    n_relations: int
    k: int
    reciprocal: bool
    version: int = VERSION


def checksum(payload: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def _payload(table: EmbeddingTable) -> bytes:
    return b"".join(
        np.ascontiguousarray(arr, dtype="<f4").tobytes() for arr in table.arrays().values()
    )


def save_checkpoint(path, table: EmbeddingTable, reciprocal: bool = False) -> None:
    payload = _payload(table)
    header = HEADER.pack(
        MAGIC, VERSION, table.variant.tag, table.ncomp, int(bool(reciprocal)),
        table.n_entities, table.n_relations, table.k,
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
        f.write(FOOTER.pack(checksum(payload)))


def load_checkpoint(path) -> tuple[EmbeddingTable, CheckpointInfo]:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size + FOOTER.size:
        raise DataError(f"{path}: truncated checkpoint")
    magic, version, tag, ncomp, reciprocal, n, m, k = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DataError(f"{path}: not a checkpoint (magic {magic!r})")
    if version != VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    try:
        variant = ModelVariant.from_tag(tag)
    except IndexError:
        raise DataError(f"{path}: unknown variant tag {tag}") from None
    if ncomp != variant.ncomp:
        raise DataError(f"{path}: component count {ncomp} does not match {variant.value}")
    blocks = [(ncomp, n, k), (ncomp, m, k)]
    if variant.has_tail_relation:
        blocks.append((ncomp, m, k))
    expected = 4 * sum(int(np.prod(b)) for b in blocks)
    payload = data[HEADER.size : len(data) - FOOTER.size]
    if len(payload) != expected:
        raise DataError(f"{path}: payload has {len(payload)} bytes, header implies {expected}")
    (stored,) = FOOTER.unpack_from(data, len(data) - FOOTER.size)
    if checksum(payload) != stored:
        raise ChecksumError(f"{path}: checksum mismatch")
    arrays = []
    offset = 0
    for shape in blocks:
        count = int(np.prod(shape))
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=offset)
        arrays.append(arr.reshape(shape).astype(np.float64))
        offset += 4 * count
    tail = arrays[2] if variant.has_tail_relation else None
    table = EmbeddingTable(arrays[0], arrays[1], variant, tail)
    return table, CheckpointInfo(variant, n, m, k, bool(reciprocal), version)


# ---------------------------------------------------------------------------
# TSV dumps: one row per embedding, "name<TAB>a,b,c,d<TAB>a,b,c,d..." (one
# comma group per dimension, components in storage order).

_SECTIONS = {"entities": "@entities", "relations": "@relations", "tail_relations": "@tail_relations"}


def _format_rows(arr):
    vals = np.asarray(arr, dtype=np.float32).transpose(1, 2, 0)  # (rows, k, ncomp)
    for row in vals:
        yield "\t".join(",".join(str(x) for x in dim) for dim in row)


def export_tsv(path, table: EmbeddingTable, entity_names=None, relation_names=None, reciprocal=False):
    entity_names = entity_names or [str(i) for i in range(table.n_entities)]
    relation_names = relation_names or [str(i) for i in range(table.n_relations)]
    if len(entity_names) != table.n_entities or len(relation_names) != table.n_relations:
        raise DataError("name lists do not match table sizes")
    names = {"entities": entity_names, "relations": relation_names, "tail_relations": relation_names}
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(
            f"# hyperkge-export variant={table.variant.value} ncomp={table.ncomp} "
            f"k={table.k} reciprocal={int(bool(reciprocal))}\n"
        )
        for field, arr in table.arrays().items():
            f.write(_SECTIONS[field] + "\n")
            for name, row in zip(names[field], _format_rows(arr)):
                f.write(f"{name}\t{row}\n")


def import_tsv(path):
    """Inverse of :func:`export_tsv`; returns ``(table, entity_names, relation_names, reciprocal)``."""
    meta = {}
    rows = {}
    names = {}
    current = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if line.startswith("# hyperkge-export"):
                meta = dict(item.split("=", 1) for item in line.split()[2:])
                continue
            if line in _SECTIONS.values():
                current = next(k for k, v in _SECTIONS.items() if v == line)
                rows[current], names[current] = [], []
                continue
            if current is None or not line:
                raise DataError(f"{path}:{lineno}: unexpected line")
            name, *dims = line.split("\t")
            names[current].append(name)
            rows[current].append([[float(x) for x in d.split(",")] for d in dims])
    if not meta or "entities" not in rows or "relations" not in rows:
        raise DataError(f"{path}: not a hyperkge export")
    variant = ModelVariant(meta["variant"])
    k = int(meta["k"])

    def to_array(field):
        arr = np.asarray(rows[field], dtype=np.float32).reshape(-1, k, variant.ncomp)
        return arr.transpose(2, 0, 1).astype(np.float64)

    tail = to_array("tail_relations") if "tail_relations" in rows else None
    table = EmbeddingTable(to_array("entities"), to_array("relations"), variant, tail)
    return table, names["entities"], names["relations"], bool(int(meta.get("reciprocal", 0)))
