"""File formats for states and instrument trees.

Both formats are JSON (UTF-8). Complex numbers are two-element arrays
``[re, im]``; decimal values round-trip exactly through the shortest
repr. A state file is::

    {"kind": "pure", "dims": [2, 2], "data": [[re, im], ...]}
    {"kind": "density", "dims": [2, 2], "data": [[[re, im], ...], ...]}

and a tree file is::

    {"dims": [2, 2], "root": {"party": "A", "kraus": [matrix, ...],
                              "children": [node, ...]}}

where leaves omit (or leave empty) ``kraus`` and ``children``. Loading
validates the physical invariants and raises InvariantViolation naming the
violated invariant and its residual.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .locc import LoccNode
from .states import BipartiteDims, DensityOperator, InvariantViolation, PureState


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fail(invariant: str, message: str, residual: float = 0.0):
    raise InvariantViolation(invariant, residual, message)


def pairs_to_vector(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        _fail("complex-pairs", f"expected a list of [re, im] pairs, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def pairs_to_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        _fail("complex-pairs", f"expected rows of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def vector_to_pairs(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v)]


def matrix_to_pairs(m: np.ndarray) -> list:
    return [vector_to_pairs(row) for row in np.asarray(m)]


def _load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        _fail("file", f"no such file: {path}")
    except json.JSONDecodeError as e:
        _fail("json", f"{path} is not well-formed JSON: {e}")


def _parse_dims(obj) -> BipartiteDims:
    if (not isinstance(obj, (list, tuple)) or len(obj) != 2
            or not all(isinstance(x, int) for x in obj)):
        _fail("dims", f"dims must be [dim_a, dim_b] integers, got {obj!r}")
    return BipartiteDims(int(obj[0]), int(obj[1]))


def load_state(path) -> PureState | DensityOperator:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        _fail("state-file", "top-level value must be an object")
    kind = doc.get("kind")
    if kind not in ("pure", "density"):
        _fail("kind", f"kind must be 'pure' or 'density', got {kind!r}")
    dims = _parse_dims(doc.get("dims"))
    if "data" not in doc:
        _fail("data", "missing 'data' field")
    if kind == "pure":
        return PureState(pairs_to_vector(doc["data"]), dims)
    return DensityOperator(pairs_to_matrix(doc["data"]), dims)


def _parse_node(obj, where: str) -> LoccNode:
    if not isinstance(obj, dict):
        _fail("tree-node", f"node at {where} must be an object")
    kraus = [pairs_to_matrix(k) for k in obj.get("kraus", [])]
    children = [
        _parse_node(c, f"{where}.{i}") for i, c in enumerate(obj.get("children", []))
    ]
    party = obj.get("party", "A")
    return LoccNode(party=party, kraus=tuple(kraus), children=tuple(children))


def load_tree(path) -> tuple[LoccNode, BipartiteDims]:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        _fail("tree-file", "top-level value must be an object")
    dims = _parse_dims(doc.get("dims"))
    if "root" not in doc:
        _fail("root", "missing 'root' field")
    return _parse_node(doc["root"], "root"), dims


def save_state(path, state: PureState | DensityOperator) -> None:
    if isinstance(state, PureState):
        doc = {"kind": "pure", "dims": list(state.dims.as_tuple()),
               "data": vector_to_pairs(state.amplitudes)}
    else:
        doc = {"kind": "density", "dims": list(state.dims.as_tuple()),
               "data": matrix_to_pairs(state.matrix)}
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def _node_to_obj(node: LoccNode) -> dict:
    return {
        "party": node.party,
        "kraus": [matrix_to_pairs(k) for k in node.kraus],
        "children": [_node_to_obj(c) for c in node.children],
    }


def save_tree(path, tree: LoccNode, dims: BipartiteDims) -> None:
    doc = {"dims": list(dims.as_tuple()), "root": _node_to_obj(tree)}
    Path(path).write_text(json.dumps(doc), encoding="utf-8")
