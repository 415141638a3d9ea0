"""Input validation helpers.

scikit-learn's ``check_array`` rejects complex input, so the checks used for
operators and states live here.
"""

import numbers

import numpy as np

from .errors import DimensionMismatch, InputError, SpecInvalid
from .tolerances import BASIS_TOL, PROB_SUM_TOL


def check_square(m, name="matrix", dtype=complex):
    m = np.asarray(m, dtype=dtype)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} has non-finite entries")
    return m


def check_operator_stack(ops, name="operators"):
    ops = np.asarray(ops, dtype=complex)
    if ops.ndim == 2:
        ops = ops[None]
    if ops.ndim != 3 or ops.shape[0] < 1 or ops.shape[1] != ops.shape[2]:
        raise DimensionMismatch(f"{name} must have shape (k, n, n), got {ops.shape}")
    if not np.all(np.isfinite(ops)):
        raise InputError(f"{name} has non-finite entries")
    return ops


def check_same_dim(n, m, what="dimensions"):
    if n != m:
        raise DimensionMismatch(f"{what} do not match: {n} != {m}", abs(n - m))


def check_probability_vector(v, name="probabilities", n=None, strict=True, tol=PROB_SUM_TOL):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise SpecInvalid(f"{name} must be a non-empty vector")
    if n is not None and v.size != n:
        raise DimensionMismatch(f"{name} has length {v.size}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise SpecInvalid(f"{name} has non-finite entries")
    if strict and np.any(v <= 0):
        raise SpecInvalid(f"{name} must be strictly positive", float(v.min()))
    if not strict and np.any(v < 0):
        raise SpecInvalid(f"{name} must be nonnegative", float(v.min()))
    dev = abs(v.sum() - 1.0)
    if dev > tol:
        raise SpecInvalid(f"{name} must sum to 1 (off by {dev:.3e})", dev)
    return v


def check_orthonormal_basis(v, name="basis", tol=BASIS_TOL):
    """Columns of ``v`` must be orthonormal."""
    v = check_square(v, name)
    dev = np.linalg.norm(v.conj().T @ v - np.eye(v.shape[0]))
    if dev > tol:
        raise SpecInvalid(f"{name} is not orthonormal (Gram deviation {dev:.3e})", dev)
    return v


def check_positive_scalar(x, name):
    if not isinstance(x, numbers.Real) or not np.isfinite(x) or x <= 0:
        raise InputError(f"{name} must be a positive real number, got {x!r}")
    return float(x)


def check_tau(tau, name="tau"):
    if not isinstance(tau, numbers.Real) or not 0.0 < tau < 1.0:
        raise SpecInvalid(f"{name} must lie in (0, 1), got {tau!r}")
    return float(tau)
