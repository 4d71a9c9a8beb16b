"""Dirichlet sine eigenbasis on an interval.

The functions w_k(x) = sqrt(2/|I|) sin(k pi (x - left)/|I|) are orthonormal in
L2 and diagonalize the Dirichlet Laplacian with eigenvalues (k pi/|I|)^2.
Modal vectors are plain float arrays of length ``n_modes``.
"""

from dataclasses import dataclass

import numpy as np

from .problem import Interval


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    domain: Interval
    n_modes: int
    eigenvalues: np.ndarray
    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    # values[m, k] = w_{k+1}(quad_nodes[m])
    values: np.ndarray
    # analysis[k, m] = quad_weights[m] * values[m, k]
    analysis: np.ndarray

    @property
    def wavenumbers(self):
        return np.arange(1, self.n_modes + 1) * np.pi / self.domain.length

    def eigenfunction(self, k, x):
        """Evaluate w_k (1-based) at ``x``."""
        dom = self.domain
        return np.sqrt(2.0 / dom.length) * np.sin(k * np.pi * (np.asarray(x) - dom.left) / dom.length)


def build_basis(domain, n_modes, quad_factor=4):
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    if quad_factor < 4:
        raise ValueError("quad_factor must be at least 4")
    m = quad_factor * n_modes
    ref_nodes, ref_weights = np.polynomial.legendre.leggauss(m)
    half = 0.5 * domain.length
    nodes = domain.left + half * (ref_nodes + 1.0)
    weights = half * ref_weights
    k = np.arange(1, n_modes + 1)
    eigenvalues = (k * np.pi / domain.length) ** 2
    values = np.sqrt(2.0 / domain.length) * np.sin(
        np.outer(nodes - domain.left, k * np.pi / domain.length))
    analysis = np.ascontiguousarray((values * weights[:, None]).T)
    for arr in (eigenvalues, nodes, weights, values, analysis):
        arr.setflags(write=False)
    return SpectralBasis(domain, n_modes, eigenvalues, nodes, weights, values, analysis)


def _modal(basis, v):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != basis.n_modes:
        raise ValueError(f"modal vector has length {v.shape[-1]}, basis has {basis.n_modes} modes")
    return v


def project(basis, f):
    """L2 projection onto the first N modes by Gauss-Legendre quadrature.

    ``f`` is a callable vectorized over x, or an array of its values at the
    quadrature nodes.
    """
    vals = f(basis.quad_nodes) if callable(f) else np.asarray(f, dtype=float)
    vals = np.broadcast_to(vals, basis.quad_nodes.shape)
    return basis.analysis @ vals


def synthesize(basis, v):
    """Values of sum_k v_k w_k at the quadrature nodes (rows of v if 2-D)."""
    return _modal(basis, v) @ basis.values.T


def evaluate(basis, v, points):
    v = _modal(basis, v)
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    dom = basis.domain
    slack = 1e-12 * dom.length
    if np.any(pts < dom.left - slack) or np.any(pts > dom.right + slack):
        raise ValueError("evaluation points must lie in the closed interval")
    k = np.arange(1, basis.n_modes + 1)
    table = np.sqrt(2.0 / dom.length) * np.sin(np.outer(pts - dom.left, k * np.pi / dom.length))
    # sin(k pi) is only ~1e-16 in floating point; pin the endpoints
    table[np.isclose(pts, dom.left, rtol=0, atol=slack) | np.isclose(pts, dom.right, rtol=0, atol=slack)] = 0.0
    out = table @ v
    return out if np.ndim(points) else float(out[0])


def gradient_pairing(basis, u, v):
    """Integral of u' v' for modal u, v: exact in the eigenbasis."""
    return float(np.sum(basis.eigenvalues * _modal(basis, u) * _modal(basis, v)))


def l2_inner(basis, u, v):
    return float(np.dot(_modal(basis, u), _modal(basis, v)))


def gram_matrix(basis):
    """Quadrature Gram matrix of the basis; the identity up to rounding."""
    return basis.analysis @ basis.values
