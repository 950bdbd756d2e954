"""Dense linear algebra for the snapshot matrix.

The eigensolver is a cyclic Jacobi method. Each sweep visits every
off-diagonal pair once, grouped by a round-robin tournament schedule so that
the n/2 rotations of one round touch disjoint rows and columns and can be
applied together as array operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError

MAX_SWEEPS = 100
OFF_DIAGONAL_TOL = 1e-12
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order; column ``j`` of ``eigenvectors`` pairs with ``eigenvalues[j]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


def _as_matrix(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ContractError(f"{name} must be two-dimensional, got shape {a.shape}")
    return a


def gram(a) -> np.ndarray:
    """``AᵀA`` for an ``N² x M`` matrix, symmetrized as ``(G + Gᵀ)/2``."""
    a = _as_matrix(a, "A")
    g = a.T @ a
    return (g + g.T) / 2.0


def matvec(a, x) -> np.ndarray:
    a = _as_matrix(a, "A")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != a.shape[1]:
        raise ContractError(f"cannot multiply {a.shape} matrix by vector of shape {x.shape}")
    return a @ x


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple:
    """Rounds of disjoint index pairs covering every pair of ``range(n)`` once.

    Returns a tuple of ``(p, q)`` index-array pairs with ``p < q``
    elementwise. Odd ``n`` gets a phantom player whose games are dropped.
    """
    players = list(range(n + (n % 2)))
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        p = np.array([a for a, _ in pairs], dtype=np.intp)
        q = np.array([b for _, b in pairs], dtype=np.intp)
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _rotate(a: np.ndarray, v: np.ndarray, p: np.ndarray, q: np.ndarray) -> None:
    apq = a[p, q]
    active = apq != 0.0
    if not active.any():
        return
    p, q, apq = p[active], q[active], apq[active]
    with np.errstate(over="ignore", divide="ignore"):
        theta = (a[q, q] - a[p, p]) / (2.0 * apq)
        t = np.where(
            np.abs(theta) > 1e150,
            0.5 / theta,
            np.copysign(1.0, theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0)),
        )
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    ap, aq = a[:, p].copy(), a[:, q]
    a[:, p] = c * ap - s * aq
    a[:, q] = s * ap + c * aq
    ap, aq = a[p, :].copy(), a[q, :]
    a[p, :] = c[:, None] * ap - s[:, None] * aq
    a[q, :] = s[:, None] * ap + c[:, None] * aq
    a[p, q] = 0.0
    a[q, p] = 0.0

    vp, vq = v[:, p].copy(), v[:, q]
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def sym_eigen(s) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm is at most
    ``1e-12 * ||S||_F`` or 100 sweeps have run. Each eigenvector is signed so
    that its largest-magnitude component is positive; equal eigenvalues keep
    their diagonal order.
    """
    s = _as_matrix(s, "S")
    n, m = s.shape
    if n != m:
        raise ContractError(f"eigendecomposition needs a square matrix, got {s.shape}")
    scale = float(np.max(np.abs(s))) if s.size else 0.0
    if np.max(np.abs(s - s.T), initial=0.0) > SYMMETRY_TOL * max(scale, 1e-300):
        raise ContractError("matrix is not symmetric within tolerance")

    a = (s + s.T) / 2.0
    v = np.eye(n)
    target = OFF_DIAGONAL_TOL * float(np.linalg.norm(a))
    sweeps = 0
    while sweeps < MAX_SWEEPS and _off_norm(a) > target:
        for p, q in _round_robin(n):
            _rotate(a, v, p, q)
        sweeps += 1

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values, v = values[order], v[:, order]
    lead = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[lead, np.arange(n)] < 0, -1.0, 1.0)
    return EigenDecomposition(values, v * signs, sweeps)
