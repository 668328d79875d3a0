"""Reading and writing of matrices and layer manifests.

Two on-disk formats are supported, selected by file extension:

* binary (any extension other than ``.csv``); layout::

      bytes 0..3   magic "RMX1"
      byte  4      kind code (1 representation, 2 kernel, 3 distance)
      bytes 5..8   n_rows, unsigned 32-bit little-endian
      bytes 9..12  n_cols, unsigned 32-bit little-endian
      bytes 13..   payload, row-major IEEE-754 float64 little-endian

* CSV (``.csv``): comma-separated values rendered with 17 significant
  digits, which round-trips every finite double exactly. No header row
  by default; kernel and distance files may carry an optional first row
  with stimulus labels.

Values must be finite; kernel and distance matrices must be square and
distance entries nonnegative. Binary files do not store labels, so
reading one yields default labels ``s0, s1, ...``.

A layer manifest is a JSON file mapping layer names to matrix files,
with optional run-level defaults (seed, a, b, n_samples). Paths are
resolved relative to the manifest's directory.
"""

from __future__ import annotations

import enum
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError

MAGIC = b"RMX1"
_HEADER = struct.Struct("<4sBII")


class MatrixKind(str, enum.Enum):
    REPRESENTATION = "representation"
    KERNEL = "kernel"
    DISTANCE = "distance"


_KIND_CODES = {
    MatrixKind.REPRESENTATION: 1,
    MatrixKind.KERNEL: 2,
    MatrixKind.DISTANCE: 3,
}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}


@dataclass(frozen=True)
class LoadedMatrix:
    """A matrix read from disk, with row labels and its declared kind."""

    values: np.ndarray
    labels: tuple[str, ...]
    kind: MatrixKind


def _coerce_kind(kind) -> MatrixKind:
    if isinstance(kind, MatrixKind):
        return kind
    try:
        return MatrixKind(str(kind))
    except ValueError:
        raise ValidationError(f"unknown matrix kind: {kind!r}") from None


def _default_labels(n: int) -> tuple[str, ...]:
    return tuple(f"s{i}" for i in range(n))


def _validate_values(values: np.ndarray, kind: MatrixKind, origin: str) -> None:
    if values.ndim != 2:
        raise ValidationError(f"{origin}: expected a 2-D matrix, got ndim={values.ndim}")
    n_rows, n_cols = values.shape
    if n_rows < 1 or n_cols < 1:
        raise ValidationError(f"{origin}: empty matrix ({n_rows}x{n_cols})")
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{origin}: matrix contains non-finite values")
    if kind in (MatrixKind.KERNEL, MatrixKind.DISTANCE) and n_rows != n_cols:
        raise ValidationError(f"{origin}: {kind.value} must be square, got {n_rows}x{n_cols}")
    if kind is MatrixKind.DISTANCE and np.any(values < 0):
        raise ValidationError(f"{origin}: distances must be nonnegative")


def _is_csv(path: Path) -> bool:
    return path.suffix.lower() == ".csv"


def read_matrix(path, expected_kind) -> LoadedMatrix:
    """Read a matrix file and validate it against the expected kind.

    The format is auto-detected from the extension. Binary files carry
    their kind and it must match; CSV files are validated against
    ``expected_kind`` directly.
    """
    path = Path(path)
    kind = _coerce_kind(expected_kind)
    if not path.exists():
        raise ValidationError(f"{path}: no such file")
    if _is_csv(path):
        values, labels = _read_csv(path)
    else:
        values, labels = _read_binary(path, kind)
    _validate_values(values, kind, str(path))
    if labels is None:
        labels = _default_labels(values.shape[0])
    elif len(labels) != values.shape[0]:
        raise ValidationError(
            f"{path}: header has {len(labels)} labels for {values.shape[0]} rows"
        )
    return LoadedMatrix(values=values, labels=tuple(labels), kind=kind)


def _read_binary(path: Path, expected: MatrixKind):
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path}: truncated header")
    magic, code, n_rows, n_cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValidationError(f"{path}: bad magic {magic!r}, not a matrix file")
    if code not in _CODE_KINDS:
        raise ValidationError(f"{path}: unknown kind code {code}")
    stored = _CODE_KINDS[code]
    if stored is not expected:
        raise ValidationError(
            f"{path}: kind mismatch, file holds {stored.value}, expected {expected.value}"
        )
    payload = raw[_HEADER.size:]
    expected_bytes = n_rows * n_cols * 8
    if len(payload) != expected_bytes:
        raise ValidationError(
            f"{path}: payload is {len(payload)} bytes, header implies {expected_bytes}"
        )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(n_rows, n_cols)
    return values, None


def _read_csv(path: Path):
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValidationError(f"{path}: empty CSV file")
    labels = None
    first = lines[0].split(",")
    try:
        [float(tok) for tok in first]
    except ValueError:
        labels = [tok.strip() for tok in first]
        lines = lines[1:]
        if not lines:
            raise ValidationError(f"{path}: CSV has a header but no data rows")
    rows = []
    width = None
    for i, ln in enumerate(lines):
        toks = ln.split(",")
        if width is None:
            width = len(toks)
        elif len(toks) != width:
            raise ValidationError(f"{path}: row {i} has {len(toks)} columns, expected {width}")
        try:
            rows.append([float(tok) for tok in toks])
        except ValueError as exc:
            raise ValidationError(f"{path}: row {i}: {exc}") from None
    return np.array(rows, dtype=np.float64), labels


def write_matrix(values, path, kind, labels: Optional[Sequence[str]] = None,
                 header: Optional[bool] = None) -> None:
    """Write a matrix so that reading it back reproduces it bit-exactly.

    ``header`` controls the CSV label row: the default writes one
    exactly when labels are given and the kind is kernel or distance.
    Binary files never store labels.
    """
    path = Path(path)
    kind = _coerce_kind(kind)
    values = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    _validate_values(values, kind, str(path))
    if labels is not None and len(labels) != values.shape[0]:
        raise ValidationError(f"{path}: {len(labels)} labels for {values.shape[0]} rows")
    if _is_csv(path):
        if header is None:
            header = labels is not None and kind in (MatrixKind.KERNEL, MatrixKind.DISTANCE)
        if header and kind is MatrixKind.REPRESENTATION:
            raise ValidationError("label headers are only supported for kernel/distance CSV")
        if header and labels is None:
            raise ValidationError("header requested but no labels given")
        _write_csv(path, values, labels if header else None)
    else:
        _write_binary(path, values, kind)


def _write_binary(path: Path, values: np.ndarray, kind: MatrixKind) -> None:
    n_rows, n_cols = values.shape
    header = _HEADER.pack(MAGIC, _KIND_CODES[kind], n_rows, n_cols)
    payload = values.astype("<f8", copy=False).tobytes(order="C")
    path.write_bytes(header + payload)


def _format_value(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, values: np.ndarray, labels: Optional[Sequence[str]]) -> None:
    out = []
    if labels is not None:
        for lab in labels:
            if "," in lab or "\n" in lab:
                raise ValidationError(f"label {lab!r} contains a separator")
        out.append(",".join(labels))
    for row in values:
        out.append(",".join(_format_value(x) for x in row))
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    path: str
    kind: MatrixKind


@dataclass(frozen=True)
class LayerManifest:
    """Named matrix files plus optional run-level defaults."""

    entries: tuple[ManifestEntry, ...]
    seed: Optional[int] = None
    a: Optional[float] = None
    b: Optional[float] = None
    n_samples: Optional[int] = None
    base_dir: Path = Path(".")

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.base_dir / p

    def names(self) -> list[str]:
        return [e.name for e in self.entries]


def read_manifest(path) -> LayerManifest:
    """Parse a JSON layer manifest and check entry-name uniqueness."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"{path}: no such manifest")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ValidationError(f"{path}: manifest must be an object with an 'entries' list")
    entries = []
    seen = set()
    for item in doc["entries"]:
        try:
            name, epath, kind = item["name"], item["path"], item["kind"]
        except (TypeError, KeyError):
            raise ValidationError(f"{path}: each entry needs name, path and kind") from None
        if name in seen:
            raise ValidationError(f"{path}: duplicate entry name {name!r}")
        seen.add(name)
        entries.append(ManifestEntry(name=str(name), path=str(epath), kind=_coerce_kind(kind)))
    if not entries:
        raise ValidationError(f"{path}: manifest has no entries")
    a = doc.get("a")
    b = doc.get("b")
    if a is not None and b is not None:
        raise ValidationError(f"{path}: manifest sets both 'a' and 'b'")
    return LayerManifest(
        entries=tuple(entries),
        seed=None if doc.get("seed") is None else int(doc["seed"]),
        a=None if a is None else float(a),
        b=None if b is None else float(b),
        n_samples=None if doc.get("n_samples") is None else int(doc["n_samples"]),
        base_dir=path.parent,
    )


def write_manifest(manifest: LayerManifest, path) -> None:
    doc = {
        "entries": [
            {"name": e.name, "path": e.path, "kind": e.kind.value} for e in manifest.entries
        ]
    }
    for key in ("seed", "a", "b", "n_samples"):
        val = getattr(manifest, key)
        if val is not None:
            doc[key] = val
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
