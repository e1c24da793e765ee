"""Discrete dG fields, face traces and the interface operators.

Field data live in arrays of shape ``(..., C, K, N+1)``: optional leading batch
axes, then component, element and node. Face traces are gathered per element
side, shape ``(..., K, 2)``, side 0 being the left end (outward normal -1) and
side 1 the right end (outward normal +1).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .basis import NodalBasis
from .mesh import Mesh1D

#: outward normal of side 0 / side 1 of every element
SIDE_NORMALS = np.array([-1.0, 1.0])


@dataclass
class FaceState:
    """Two-sided traces seen from one element side.

    ``u_minus``/``u_plus`` map component names to interior/exterior values;
    materials are mapped the same way. Values broadcast against each other,
    so the same record serves a single face or every side of a mesh.
    """

    u_minus: Mapping[str, np.ndarray]
    u_plus: Mapping[str, np.ndarray]
    n_minus: np.ndarray | float
    material_minus: Mapping[str, np.ndarray] = field(default_factory=dict)
    material_plus: Mapping[str, np.ndarray] = field(default_factory=dict)


def jump(face: FaceState, component: str):
    """u- n- + u+ n+ with n+ = -n-."""
    return face.n_minus * (face.u_minus[component] - face.u_plus[component])


def mean(face: FaceState, component: str):
    return 0.5 * (face.u_minus[component] + face.u_plus[component])


def diff(face: FaceState, component: str):
    return face.u_minus[component] - face.u_plus[component]


def element_traces(values: np.ndarray) -> np.ndarray:
    """Interior traces (..., K, 2) of nodal values (..., K, N+1); GLL holds the endpoints."""
    return np.stack([values[..., 0], values[..., -1]], axis=-1)


def neighbor_traces(traces: np.ndarray, periodic: bool) -> np.ndarray:
    """Exterior traces from the neighbouring elements.

    Boundary sides of a non-periodic mesh receive a copy of the interior value;
    callers overwrite them with the model's ghost state.
    """
    out = np.empty_like(traces)
    out[..., 1:, 0] = traces[..., :-1, 1]
    out[..., :-1, 1] = traces[..., 1:, 0]
    if periodic:
        out[..., 0, 0] = traces[..., -1, 1]
        out[..., -1, 1] = traces[..., 0, 0]
    else:
        out[..., 0, 0] = traces[..., 0, 0]
        out[..., -1, 1] = traces[..., -1, 1]
    return out


class DgField:
    """Element-by-element nodal coefficients of named components."""

    def __init__(self, mesh: Mesh1D, basis: NodalBasis, names: Sequence[str], data=None):
        self.mesh = mesh
        self.basis = basis
        self.names = tuple(names)
        shape = (len(self.names), mesh.K, basis.n_nodes)
        if data is None:
            data = np.zeros(shape)
        data = np.asarray(data, dtype=float)
        if data.shape != shape:
            data = data.reshape(shape)
        self.data = data

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[self.names.index(name)]

    def __setitem__(self, name: str, values) -> None:
        self.data[self.names.index(name)] = values

    @property
    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def copy(self) -> "DgField":
        return DgField(self.mesh, self.basis, self.names, self.data.copy())

    def coordinates(self) -> np.ndarray:
        return self.mesh.map_points(self.basis.nodes)

    def traces(self, name: str) -> np.ndarray:
        return element_traces(self[name])

    def csv_rows(self, time: float | None = None):
        x = self.coordinates()
        for e in range(self.mesh.K):
            for j in range(self.basis.n_nodes):
                row = [e, j, repr(float(x[e, j]))]
                if time is not None:
                    row.insert(0, repr(float(time)))
                row += [repr(float(self.data[c, e, j])) for c in range(len(self.names))]
                yield row

    def csv_header(self, with_time: bool = False) -> list[str]:
        cols = ["element", "node", "x", *self.names]
        return (["t"] + cols) if with_time else cols


def sample(mesh: Mesh1D, basis: NodalBasis, functions, names: Sequence[str] | None = None) -> DgField:
    """Nodal interpolation of ``functions`` (callable or mapping name -> callable)."""
    if callable(functions):
        functions = {(names or ("u",))[0]: functions}
    names = tuple(names or functions.keys())
    x = mesh.map_points(basis.nodes)
    out = DgField(mesh, basis, names)
    for name in names:
        f = functions[name]
        out[name] = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    return out


def broken_inner_product(a: DgField, b: DgField, weight: DgField | Mapping[str, np.ndarray] | None = None) -> float:
    """Sum over elements and components of the Jacobian-scaled quadrature pairing.

    Elements are reduced in index order so repeated evaluation is bit-identical.
    """
    if a.data.shape != b.data.shape or a.names != b.names:
        raise ValueError("fields are not compatible")
    basis = a.basis
    J = a.mesh.jacobians
    total = 0.0
    for c, name in enumerate(a.names):
        fq = basis.to_quad(a.data[c])
        gq = basis.to_quad(b.data[c])
        if weight is None:
            wq = 1.0
        else:
            wq = basis.to_quad(np.asarray(weight[name], dtype=float))
        per_elem = np.sum(basis.quad_weights * fq * gq * wq, axis=-1) * J
        for e in range(per_elem.size):
            total += per_elem[e]
    return float(total)


def write_csv(path, header_lines: Sequence[str], columns: Sequence[str], rows) -> None:
    """CSV with a ``#``-comment preamble."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row)


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Inverse of :func:`write_csv`: (columns, rows), comment lines skipped."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    cols = next(reader)
    return cols, [r for r in reader]


ScalarFunction = Callable[[np.ndarray], np.ndarray]
