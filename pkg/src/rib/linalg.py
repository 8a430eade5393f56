"""Symmetric-matrix helpers with a shared conditioning policy.

All fractional powers and inverses of symmetric matrices go through a single
eigendecomposition routine with an eigenvalue floor of ``1e-12 * lambda_max``.
Eigenvalues below the floor raise ``RankDeficient`` when the caller declares
the matrix must be invertible.
"""

from __future__ import annotations

import numpy as np

from .errors import RankDeficient, SingularCovariance

EIG_FLOOR_REL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    return m


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def sym_power(a, power: float, *, require_full_rank: bool = True) -> np.ndarray:
    """Fractional power of a symmetric PSD matrix via eigendecomposition.

    Eigenvalues below ``EIG_FLOOR_REL * lambda_max`` trigger ``RankDeficient``
    for negative powers (and are zeroed for nonnegative powers when
    ``require_full_rank`` is False).
    """
    m = symmetrize(as_matrix(a))
    if m.shape[0] == 0:
        return m.copy()
    vals, vecs = np.linalg.eigh(m)
    floor = EIG_FLOOR_REL * max(float(vals[-1]), 0.0)
    small = vals <= floor
    if small.any():
        if power < 0 or require_full_rank:
            raise RankDeficient(
                f"eigenvalue {vals[small][0]:.3e} below floor {floor:.3e} "
                f"for power {power}"
            )
        powered = np.where(small, 0.0, np.maximum(vals, floor) ** power)
    else:
        powered = vals**power
    return (vecs * powered) @ vecs.T


def sym_inv(a) -> np.ndarray:
    return sym_power(a, -1.0)


def sym_inv_sqrt(a) -> np.ndarray:
    return sym_power(a, -0.5)


def sym_sqrt(a, *, require_full_rank: bool = False) -> np.ndarray:
    return sym_power(a, 0.5, require_full_rank=require_full_rank)


def check_spd(a, name: str = "covariance") -> np.ndarray:
    """Validate symmetry and positive definiteness; returns the symmetrized copy."""
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise SingularCovariance(f"{name} must be square, got {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-10 * (1.0 + np.abs(m).max())):
        raise SingularCovariance(f"{name} is not symmetric")
    m = symmetrize(m)
    vals = np.linalg.eigvalsh(m)
    if vals[0] <= EIG_FLOOR_REL * max(float(vals[-1]), 0.0):
        raise SingularCovariance(
            f"{name} is not positive definite (min eigenvalue {vals[0]:.3e})"
        )
    return m


def logdet_spd(a) -> float:
    """log det of a symmetric positive definite matrix (0x0 gives 0)."""
    m = as_matrix(a)
    if m.shape[0] == 0:
        return 0.0
    sign, value = np.linalg.slogdet(symmetrize(m))
    if sign <= 0:
        raise SingularCovariance("matrix is not positive definite in logdet")
    return float(value)
