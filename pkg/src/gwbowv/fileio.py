"""File helpers shared by the pipeline stages."""

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from gwbowv.errors import ToolkitError

FORMAT_VERSION = 1


def atomic_write_bytes(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=1, sort_keys=False) + "\n")


def read_json(path):
    path = Path(path)
    if not path.exists():
        raise ToolkitError("file_not_found", str(path))
    with path.open("r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ToolkitError("bad_json", f"{path}: {exc}") from None


def write_jsonl(path, rows):
    lines = [json.dumps(r, ensure_ascii=False, sort_keys=False) for r in rows]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def read_jsonl_lines(path):
    """Yield ``(line_number, raw_line)`` for non-blank lines."""
    path = Path(path)
    if not path.exists():
        raise ToolkitError("file_not_found", str(path))
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                yield lineno, line


def read_jsonl(path):
    rows = []
    for lineno, line in read_jsonl_lines(path):
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ToolkitError("bad_json", f"{path}:{lineno}: {exc}") from None
    return rows


def save_matrix(stem, matrix, **manifest):
    """Write ``<stem>.json`` (manifest) and ``<stem>.f32`` (little-endian float32, row-major)."""
    stem = Path(stem)
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ToolkitError("bad_shape", f"expected a 2-d matrix, got {matrix.shape}")
    data = np.ascontiguousarray(matrix, dtype="<f4")
    meta = {
        "format_version": FORMAT_VERSION,
        "rows": int(data.shape[0]),
        "dims": int(data.shape[1]),
        "dtype": "float32",
        "byte_order": "little",
        "order": "row-major",
        "data_file": stem.name + ".f32",
    }
    meta.update(manifest)
    atomic_write_bytes(stem.with_name(stem.name + ".f32"), data.tobytes())
    write_json(stem.with_name(stem.name + ".json"), meta)
    return meta


def load_matrix(stem):
    """Inverse of :func:`save_matrix`; returns ``(float64 matrix, manifest)``."""
    stem = Path(stem)
    if stem.suffix == ".json":
        stem = stem.with_suffix("")
    meta = read_json(stem.with_name(stem.name + ".json"))
    data_path = stem.parent / meta["data_file"]
    if not data_path.exists():
        raise ToolkitError("file_not_found", str(data_path))
    raw = np.fromfile(data_path, dtype="<f4")
    rows, dims = meta["rows"], meta["dims"]
    if raw.size != rows * dims:
        raise ToolkitError("bad_matrix", f"{data_path}: expected {rows}x{dims} floats, found {raw.size}")
    return raw.reshape(rows, dims).astype(np.float64), meta
