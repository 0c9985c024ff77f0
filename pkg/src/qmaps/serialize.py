"""JSON envelopes for every artifact the command line reads and writes.

Matrices are encoded as {"rows": n, "cols": m, "data": [[re, im], ...]} in
row-major order with IEEE-754 doubles; this is the bit-level interchange
contract shared by all other envelopes. Serialisation is canonical: sorted
keys, fixed separators, shortest round-trippable decimals, so repeated runs
produce byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Any

import numpy as np

from . import linalg
from .channels import Dilation
from .maps import AForm, BForm, OperatorSumRep, QuantumMap, TomographicRep
from .process_tensor import ProcessTensor
from .superchannel import ControlOperation


def matrix_to_json(m: np.ndarray) -> dict:
    m = linalg.as_matrix(m)
    rows, cols = m.shape
    data = [[float(x.real), float(x.imag)] for x in m.reshape(-1)]
    return {"rows": rows, "cols": cols, "data": data}


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows * cols:
        raise ValueError(f"matrix data length {len(data)} does not match {rows}x{cols}")
    flat = np.array([complex(re, im) for re, im in data])
    return linalg.as_matrix(flat.reshape(rows, cols))


def map_to_json(m: QuantumMap) -> dict:
    rep = m.rep
    if isinstance(rep, TomographicRep):
        payload: Any = {
            "basis_inputs": [matrix_to_json(x) for x in rep.basis_inputs],
            "duals": [matrix_to_json(x) for x in rep.duals],
            "outputs": [matrix_to_json(x) for x in rep.outputs],
        }
    elif isinstance(rep, OperatorSumRep):
        payload = {
            "left_ops": [matrix_to_json(x) for x in rep.left_ops],
            "right_ops": [matrix_to_json(x) for x in rep.right_ops],
        }
    else:
        payload = {"matrix": matrix_to_json(rep.matrix)}
    return {"d_in": m.d_in, "d_out": m.d_out, "repr": m.rep_name, "payload": payload}


def map_from_json(obj: dict) -> QuantumMap:
    d_in, d_out = int(obj["d_in"]), int(obj["d_out"])
    name = obj["repr"]
    payload = obj["payload"]
    if name == "tomographic":
        rep: Any = TomographicRep(
            tuple(matrix_from_json(x) for x in payload["basis_inputs"]),
            tuple(matrix_from_json(x) for x in payload["duals"]),
            tuple(matrix_from_json(x) for x in payload["outputs"]),
        )
    elif name == "kraus":
        rep = OperatorSumRep(
            tuple(matrix_from_json(x) for x in payload["left_ops"]),
            tuple(matrix_from_json(x) for x in payload["right_ops"]),
        )
    elif name == "aform":
        rep = AForm(matrix_from_json(payload["matrix"]))
    elif name == "bform":
        rep = BForm(matrix_from_json(payload["matrix"]))
    else:
        raise ValueError(f"unknown map representation {name!r}")
    return QuantumMap(d_in, d_out, rep)


def dilation_to_json(d: Dilation) -> dict:
    return {
        "d_s": d.d_s,
        "d_e": d.d_e,
        "initial_se": matrix_to_json(d.initial_se),
        "unitaries": [matrix_to_json(u) for u in d.unitaries],
    }


def dilation_from_json(obj: dict) -> Dilation:
    return Dilation(
        int(obj["d_s"]),
        int(obj["d_e"]),
        matrix_from_json(obj["initial_se"]),
        tuple(matrix_from_json(u) for u in obj["unitaries"]),
    )


def operation_to_json(op: ControlOperation) -> dict:
    return {"d": op.d, "bform": matrix_to_json(op.bform), "trace_class": op.trace_class}


def operation_from_json(obj: dict) -> ControlOperation:
    op = ControlOperation(matrix_from_json(obj["bform"]), obj.get("trace_class", "tni"))
    if op.d != int(obj["d"]):
        raise ValueError(f"operation dimension {obj['d']} does not match its B form")
    return op


def process_tensor_to_json(pt: ProcessTensor) -> dict:
    return {
        "k": pt.k,
        "d_s": pt.d_s,
        "leg_order": pt.leg_order,
        "choi": matrix_to_json(pt.choi),
    }


def process_tensor_from_json(obj: dict) -> ProcessTensor:
    pt = ProcessTensor(int(obj["k"]), int(obj["d_s"]), matrix_from_json(obj["choi"]))
    declared = obj.get("leg_order")
    if declared != pt.leg_order:
        raise ValueError(
            f"leg_order {declared!r} does not match the canonical ordering {pt.leg_order!r}"
        )
    return pt


# ------------------------------------------------------------- generic encode

def to_jsonable(value):
    """Recursively encode reports mixing matrices, numbers and containers."""
    if isinstance(value, np.ndarray):
        return matrix_to_json(value)
    if isinstance(value, QuantumMap):
        return map_to_json(value)
    if isinstance(value, ProcessTensor):
        return process_tensor_to_json(value)
    if isinstance(value, Dilation):
        return dilation_to_json(value)
    if isinstance(value, ControlOperation):
        return operation_to_json(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return to_jsonable(value.item())
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag} if value.imag else value.real
    if hasattr(value, "__dataclass_fields__"):
        return {k: to_jsonable(getattr(value, k)) for k in value.__dataclass_fields__}
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    raise TypeError(f"cannot encode {type(value)!r}")


def dumps_canonical(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=1, allow_nan=False)
    return text + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qmaps-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: str) -> dict:
    with open(path) as handle:
        return json.load(handle)
