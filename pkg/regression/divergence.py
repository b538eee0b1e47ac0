"""
Positive-definite divergence between covariance matrices
"""
import numpy as np
from scipy import linalg

from utils.errors import NotPositiveDefinite


def _inverse_sqrt(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or not np.allclose(s, s.T, rtol=1e-10, atol=1e-12):
        raise NotPositiveDefinite("matrix is not square and symmetric")
    try:
        linalg.cholesky(s, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Cholesky factorization failed") from exc
    eigenvalues, eigenvectors = linalg.eigh(s)
    return (eigenvectors / np.sqrt(eigenvalues)) @ eigenvectors.T


def _whitened_trace_norm(a: np.ndarray, b: np.ndarray) -> float:
    """|| A^{-1/2} B A^{-1/2} - I ||_tr"""
    root = _inverse_sqrt(a)
    m = root @ b @ root
    m = 0.5 * (m + m.T) - np.eye(a.shape[0])
    return float(np.abs(linalg.eigvalsh(m)).sum())


def psd_distance(s1, s2) -> float:
    """
    d_PD(S1, S2): the larger of the two whitened trace-norm discrepancies

    Symmetric in its arguments and invariant under inverting both matrices.
    """
    s1 = np.asarray(s1, dtype=np.float64)
    s2 = np.asarray(s2, dtype=np.float64)
    if s1.shape != s2.shape:
        raise NotPositiveDefinite(f"shape mismatch {s1.shape} vs {s2.shape}")
    return max(_whitened_trace_norm(s1, s2), _whitened_trace_norm(s2, s1))
