"""Reference-element machinery on [-1, 1].

Gauss-Lobatto-Legendre (GLL) nodes double as interpolation nodes and, in
collocation mode, as quadrature points. Over-integration interpolates nodal
values to an interior Gauss-Legendre rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre

COLLOCATION = "collocation"
OVER_INTEGRATION = "over-integration"
QUAD_MODES = (COLLOCATION, OVER_INTEGRATION)


def legendre_and_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Legendre polynomial P_n and its derivative at ``x`` (three-term recurrence)."""
    x = np.asarray(x, dtype=float)
    p_prev, p = np.ones_like(x), x.copy()
    if n == 0:
        return p_prev, np.zeros_like(x)
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    # P_n' from P_n, P_{n-1}; the endpoint formula avoids the 1 - x^2 division
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = n * (p_prev - x * p) / (1.0 - x * x)
    end = np.isclose(np.abs(x), 1.0, rtol=0.0, atol=1e-15)
    dp[end] = (np.sign(x[end]) ** (n + 1)) * n * (n + 1) / 2.0
    return p, dp


def gll_nodes_weights(order: int, tol: float = 1e-14, maxiter: int = 100):
    """GLL nodes and weights for polynomial degree ``order``.

    Interior nodes are the roots of P_N', found by Newton iteration started
    from Chebyshev-Gauss-Lobatto points.
    """
    n = order
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    interior = x[1:-1].copy()
    for _ in range(maxiter):
        if interior.size == 0:
            break
        # roots of (1 - x^2) P_N' <=> Newton on q = P_{N+1} - P_{N-1}
        p_np1, dp_np1 = legendre_and_derivative(n + 1, interior)
        p_nm1, dp_nm1 = legendre_and_derivative(n - 1, interior)
        step = (p_np1 - p_nm1) / (dp_np1 - dp_nm1)
        interior -= step
        if np.max(np.abs(step)) < tol:
            break
    else:
        raise RuntimeError("GLL Newton iteration did not converge")
    x[1:-1] = interior
    x[0], x[-1] = -1.0, 1.0
    pn, _ = legendre_and_derivative(n, x)
    w = 2.0 / (n * (n + 1) * pn**2)
    return x, w


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lagrange_matrix(nodes: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Matrix ``V[q, j] = l_j(points[q])`` for the Lagrange basis on ``nodes``."""
    bw = barycentric_weights(nodes)
    points = np.asarray(points, dtype=float)
    diff = points[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, rtol=0.0, atol=1e-15)
    diff[exact] = 1.0
    tmp = bw[None, :] / diff
    V = tmp / tmp.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    V[rows] = exact[rows].astype(float)
    return V


def differentiation_matrix(nodes: np.ndarray) -> np.ndarray:
    """``D[i, j] = l_j'(x_i)``; diagonal fixed by the row-sum (constants) identity."""
    bw = barycentric_weights(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (bw[None, :] / bw[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


@dataclass(frozen=True)
class NodalBasis:
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    diff: np.ndarray
    quad_mode: str = COLLOCATION
    quad_points: np.ndarray = field(repr=False, default=None)
    quad_weights: np.ndarray = field(repr=False, default=None)
    interp: np.ndarray = field(repr=False, default=None)
    interp_deriv: np.ndarray = field(repr=False, default=None)

    @property
    def n_nodes(self) -> int:
        return self.order + 1

    @property
    def n_quad(self) -> int:
        return self.quad_points.size

    @property
    def collocated(self) -> bool:
        return self.quad_mode == COLLOCATION

    def to_quad(self, values: np.ndarray) -> np.ndarray:
        """Interpolate nodal values (last axis) to the active quadrature points."""
        return values @ self.interp.T

    def deriv_at_quad(self, values: np.ndarray) -> np.ndarray:
        """Reference derivative d/dr of the interpolant at the quadrature points."""
        return values @ self.interp_deriv.T


def build_basis(order: int, quad_mode: str = COLLOCATION, n_quad: int | None = None) -> NodalBasis:
    """Build the GLL basis of degree ``order``.

    With ``quad_mode="over-integration"`` an ``n_quad``-point Gauss-Legendre rule
    is attached (default ``3*order + 1``, exact to degree 6N+1).
    """
    if int(order) != order or order < 1:
        raise ValueError(f"order must be an integer >= 1, got {order!r}")
    order = int(order)
    if quad_mode not in QUAD_MODES:
        raise ValueError(f"unknown quad_mode {quad_mode!r}; expected one of {QUAD_MODES}")
    nodes, weights = gll_nodes_weights(order)
    D = differentiation_matrix(nodes)
    if quad_mode == COLLOCATION:
        if n_quad is not None and n_quad != order + 1:
            raise ValueError("collocation uses exactly order+1 GLL points")
        qp, qw = nodes, weights
        interp = np.eye(order + 1)
        interp_deriv = D
    else:
        m = 3 * order + 1 if n_quad is None else int(n_quad)
        if m < order + 1:
            raise ValueError(f"over-integration needs at least order+1={order + 1} points, got {m}")
        qp, qw = legendre.leggauss(m)
        interp = lagrange_matrix(nodes, qp)
        interp_deriv = interp @ D
    if np.any(qw <= 0):
        raise RuntimeError("nonpositive quadrature weight")
    return NodalBasis(order, nodes, weights, D, quad_mode, qp, qw, interp, interp_deriv)


def differentiate(basis: NodalBasis, values) -> np.ndarray:
    """Exact reference derivative of the degree-N interpolant, at the nodes."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != basis.n_nodes:
        raise ValueError(f"expected {basis.n_nodes} nodal values, got {values.shape[-1]}")
    return values @ basis.diff.T


def quadrature_inner_product(basis: NodalBasis, f_values, g_values, pointwise_weight=None) -> float:
    """sum_q w_q f_q g_q omega_q over the active rule on [-1, 1].

    Inputs are nodal values; they are interpolated first when over-integrating.
    ``pointwise_weight`` may be nodal values or None (omega = 1).
    """
    f = np.asarray(f_values, dtype=float)
    g = np.asarray(g_values, dtype=float)
    for v in (f, g):
        if v.shape[-1] != basis.n_nodes:
            raise ValueError(f"expected {basis.n_nodes} nodal values, got {v.shape[-1]}")
    fq, gq = basis.to_quad(f), basis.to_quad(g)
    if pointwise_weight is None:
        omega = 1.0
    else:
        omega = basis.to_quad(np.asarray(pointwise_weight, dtype=float))
    return float(np.sum(basis.quad_weights * fq * gq * omega))
