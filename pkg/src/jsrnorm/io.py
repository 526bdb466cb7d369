"""JSON formats for matrix sets, balls, transforms and run reports.

The validators are hand-written rather than delegated to a JSON-Schema
library because they must check shape relations (square, equal dimension,
equal row lengths) that plain schemas cannot express; errors carry the JSON
pointer of the offending field.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .matset import MatrixSet
from .polytope import SymmetricPolytope


class SchemaError(InvalidInputError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_matrix(obj, ptr: str, square: bool = True) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(ptr, "expected a nonempty list of rows")
    width = None
    for i, row in enumerate(obj):
        if not isinstance(row, list) or not row:
            raise SchemaError(f"{ptr}/{i}", "expected a nonempty list of numbers")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SchemaError(f"{ptr}/{i}", f"row has length {len(row)}, expected {width}")
        for j, x in enumerate(row):
            if not _is_number(x):
                raise SchemaError(f"{ptr}/{i}/{j}", "expected a finite number")
    if square and len(obj) != width:
        raise SchemaError(ptr, f"matrix is {len(obj)}x{width}, expected square")
    return np.array(obj, dtype=float)


def _check_stack(obj, ptr: str) -> list[np.ndarray]:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(ptr, "expected a nonempty list of matrices")
    mats = []
    for k, m in enumerate(obj):
        A = _check_matrix(m, f"{ptr}/{k}")
        if mats and A.shape != mats[0].shape:
            raise SchemaError(f"{ptr}/{k}", f"dimension {A.shape[0]} differs from {mats[0].shape[0]}")
        mats.append(A)
    return mats


def parse_matrices(doc) -> list[np.ndarray]:
    """Raw member list of a matrix-set document (no deduplication)."""
    if not isinstance(doc, dict):
        raise SchemaError("", "expected an object")
    if "matrices" not in doc:
        raise SchemaError("/matrices", "missing required field")
    return _check_stack(doc["matrices"], "/matrices")


def parse_matrix_set(doc) -> MatrixSet:
    return MatrixSet(parse_matrices(doc))


def parse_ball(doc) -> SymmetricPolytope:
    if not isinstance(doc, dict):
        raise SchemaError("", "expected an object")
    arrays = {}
    for key in ("vertex_reps", "facet_reps"):
        if key not in doc:
            raise SchemaError(f"/{key}", "missing required field")
        arrays[key] = _check_matrix(doc[key], f"/{key}", square=False)
    if arrays["vertex_reps"].shape[1] != arrays["facet_reps"].shape[1]:
        raise SchemaError("/facet_reps", "width differs from vertex_reps")
    ball = SymmetricPolytope(arrays["vertex_reps"], arrays["facet_reps"])
    ball.check()
    return ball


def parse_transform(doc) -> np.ndarray:
    if not isinstance(doc, dict):
        raise SchemaError("", "expected an object")
    if "T" not in doc:
        raise SchemaError("/T", "missing required field")
    return _check_matrix(doc["T"], "/T")


# -- serialization -------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _dump(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        return _dump(obj.tolist(), indent, level)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_dump(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _dump(obj, indent, 0) + "\n"


def read_json(path) -> object:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def matrix_set_doc(M) -> dict:
    mats = M.matrices if isinstance(M, MatrixSet) else np.asarray(M)
    return {"matrices": mats}


def ball_doc(ball: SymmetricPolytope) -> dict:
    return {"vertex_reps": ball.vertex_reps, "facet_reps": ball.facet_reps}


def load_matrix_set(path) -> MatrixSet:
    return parse_matrix_set(read_json(path))


def save_matrix_set(path, M) -> None:
    write_json(path, matrix_set_doc(M))


@dataclass
class RunReport:
    command: str
    seed: int = 0
    inputs: dict = field(default_factory=dict)  # name -> sha256
    outputs: dict = field(default_factory=dict)
    certified_flags: dict = field(default_factory=dict)
    verifications: list = field(default_factory=list)
    heuristic: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "certified_flags": self.certified_flags,
            "verifications": self.verifications,
            "heuristic": self.heuristic,
            "wall_time": self.wall_time,
        }


def save_report(path, report: RunReport) -> None:
    write_json(path, report.to_dict())
