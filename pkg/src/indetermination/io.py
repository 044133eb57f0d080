"""CSV and JSON readers/writers for the package's data types.

CSV is headerless by default (rows newline-separated, cells
comma-separated, decimal dot, UTF-8); floats are written with 17
significant digits so every double round-trips exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .continuous import DensityKind, DensitySpec
from .coupling import JointDistribution, Margin
from .errors import InvalidDistribution
from .graphs import WeightedGraph

__all__ = [
    "read_matrix_csv",
    "write_matrix_csv",
    "read_vector_csv",
    "write_vector_csv",
    "read_margin_csv",
    "joint_to_dict",
    "joint_from_dict",
    "read_joint_json",
    "write_joint_json",
    "density_to_dict",
    "density_from_dict",
    "read_density_json",
    "write_density_json",
    "read_graph_csv",
]

FLOAT_FORMAT = "%.17g"


def read_matrix_csv(path, header: bool = False) -> np.ndarray:
    """Load a dense matrix from headerless (or one-header-line) CSV."""
    try:
        m = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except ValueError as exc:
        raise InvalidDistribution(f"cannot parse {path} as a numeric CSV: {exc}") from exc
    return m


def write_matrix_csv(path, matrix, header: bool = False) -> None:
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    head = ",".join(f"c{j}" for j in range(m.shape[1])) if header else ""
    np.savetxt(path, m, fmt=FLOAT_FORMAT, delimiter=",",
               header=head, comments="")


def read_vector_csv(path, header: bool = False) -> np.ndarray:
    """Load a vector laid out as a single CSV row, column, or both."""
    return read_matrix_csv(path, header=header).ravel()


def write_vector_csv(path, vector, header: bool = False) -> None:
    write_matrix_csv(path, np.asarray(vector, dtype=float)[None, :], header=header)


def read_margin_csv(path, header: bool = False) -> Margin:
    return Margin(read_vector_csv(path, header=header))


def joint_to_dict(pi: JointDistribution) -> dict:
    return {
        "cells": pi.cells.tolist(),
        "row_margin": pi.row_margin.weights.tolist(),
        "col_margin": pi.col_margin.weights.tolist(),
    }


def joint_from_dict(data: dict) -> JointDistribution:
    cells = data["cells"]
    row = Margin(data["row_margin"]) if "row_margin" in data else None
    col = Margin(data["col_margin"]) if "col_margin" in data else None
    return JointDistribution(cells, row, col)


def write_joint_json(path, pi: JointDistribution) -> None:
    Path(path).write_text(json.dumps(joint_to_dict(pi)) + "\n", encoding="utf-8")


def read_joint_json(path) -> JointDistribution:
    return joint_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def density_to_dict(spec: DensitySpec) -> dict:
    return {
        "kind": spec.kind.value,
        "support": [spec.support[0], spec.support[1]],
        "knots": spec.knots.tolist(),
        "values": spec.values.tolist(),
    }


def density_from_dict(data: dict) -> DensitySpec:
    kind = DensityKind(data["kind"])
    knots = np.asarray(data["knots"], dtype=float)
    if "support" in data:
        a, b = float(data["support"][0]), float(data["support"][1])
        if abs(knots[0] - a) > 1e-12 or abs(knots[-1] - b) > 1e-12:
            raise InvalidDistribution("knots do not span the declared support")
    return DensitySpec(kind, knots, data["values"])


def write_density_json(path, spec: DensitySpec) -> None:
    Path(path).write_text(json.dumps(density_to_dict(spec)) + "\n", encoding="utf-8")


def read_density_json(path) -> DensitySpec:
    return density_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def read_graph_csv(path, header: bool = False) -> WeightedGraph:
    """Load an undirected edge list ``i,j,weight`` (each edge once)."""
    rows = read_matrix_csv(path, header=header)
    if rows.shape[1] != 3:
        raise InvalidDistribution("edge list needs exactly three columns: i,j,weight")
    return WeightedGraph.from_edges(
        (int(i), int(j), float(w)) for i, j, w in rows)
