"""Small dense matrix kernel shared by every other module.

Matrices are plain 2-D ``numpy.ndarray`` objects of ``float64``.  All of them
are at most 18x18 here, so nothing is sparse and nothing is blocked.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EigenFailure, SingularMatrix

# library-wide tolerances
SYMTOL = 1e-10
LINTOL = 1e-10
PIVTOL = 1e-12
EIGTOL = 1e-10
# interior eigenvalues below this fraction of the largest count as zero stiffness
DEFLATE_TOL = 1e-9


def as_mat(a) -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def is_symmetric(a, tol: float = SYMTOL) -> bool:
    a = as_mat(a)
    if a.shape[0] != a.shape[1]:
        return False
    scale = 1.0 + (np.abs(a).max() if a.size else 0.0)
    return bool(np.all(np.abs(a - a.T) <= tol * scale))


def solve_sym(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` for symmetric ``a``.

    LU with partial pivoting; raises :class:`SingularMatrix` when a pivot
    falls below ``PIVTOL * max|a|``.
    """
    a = as_mat(a)
    b = as_mat(b)
    if a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} and {b.shape}")
    n = a.shape[0]
    if n == 0:
        return np.zeros_like(b)
    amax = np.abs(a).max()
    if amax == 0.0:
        raise SingularMatrix("zero matrix")
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVTOL * amax:
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below {PIVTOL:.0e} * max|A| = {PIVTOL * amax:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b)


def inverse(a) -> np.ndarray:
    a = as_mat(a)
    return solve_sym(a, np.eye(a.shape[0])) if is_symmetric(a) else _general_inverse(a)


def _general_inverse(a: np.ndarray) -> np.ndarray:
    amax = np.abs(a).max()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a)
    if np.abs(np.diag(lu)).min() < PIVTOL * amax:
        raise SingularMatrix("matrix is not invertible")
    return scipy.linalg.lu_solve((lu, piv), np.eye(a.shape[0]))


def sym_eigh(a) -> tuple[np.ndarray, np.ndarray]:
    a = as_mat(a)
    a = 0.5 * (a + a.T)
    try:
        return np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigenFailure(str(exc)) from exc


def numerical_rank(a, tol: float = 1e-9) -> int:
    """Count singular values (eigenvalue magnitudes if symmetric) above ``tol`` times the largest."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_mat(a)
    if a.size == 0:
        return 0
    if is_symmetric(a):
        s = np.abs(sym_eigh(a)[0])
    else:
        s = np.linalg.svd(a, compute_uv=False)
    top = s.max()
    if top == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * top))


def min_sym_eigenvalue(a) -> float:
    return float(sym_eigh(a)[0][0])


def null_space(a, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space of symmetric ``a``."""
    w, v = sym_eigh(a)
    top = np.abs(w).max() if w.size else 0.0
    return v[:, np.abs(w) <= tol * top] if top > 0 else v


@dataclass(frozen=True)
class CondensationResult:
    """Outcome of eliminating a set of DOFs from a stiffness system.

    ``stiffness`` acts on the retained DOFs; ``recovery`` maps retained DOF
    values to the eliminated ones (``u_drop = recovery @ u_keep``).
    ``deflated`` counts eliminated directions that carried no stiffness and
    no coupling, so they were dropped instead of inverted.
    """

    stiffness: np.ndarray
    recovery: np.ndarray
    keep: tuple[int, ...]
    drop: tuple[int, ...]
    deflated: int = 0


def static_condense(k, keep, drop=None, coupling_tol: float = 1e-9) -> CondensationResult:
    """Schur-complement condensation ``L - M N^-1 M^T``.

    If the interior block ``N`` is singular, directions in its null space are
    dropped when they are also free of coupling to the retained DOFs (a
    zero-stiffness DOF that nothing pushes on).  Any coupled null direction
    raises :class:`SingularMatrix`.
    """
    k = as_mat(k)
    n = k.shape[0]
    keep = tuple(int(i) for i in keep)
    if drop is None:
        drop = tuple(i for i in range(n) if i not in set(keep))
    drop = tuple(int(i) for i in drop)
    if keep == tuple(range(len(keep))) and drop == tuple(range(len(keep), n)):
        nk = len(keep)
        big_l, big_m, big_n = k[:nk, :nk], k[:nk, nk:], k[nk:, nk:]
    else:
        big_l = k[np.ix_(keep, keep)]
        big_m = k[np.ix_(keep, drop)]
        big_n = k[np.ix_(drop, drop)]
    deflated = 0
    try:
        x = solve_sym(big_n, big_m.T)
    except SingularMatrix:
        w, v = sym_eigh(big_n)
        top = np.abs(w).max()
        if top == 0.0:
            raise
        zero = np.abs(w) <= DEFLATE_TOL * top
        scale = max(np.abs(k).max(), 1.0)
        if np.abs(big_m @ v[:, zero]).max(initial=0.0) > coupling_tol * scale:
            raise
        vr = v[:, ~zero]
        x = vr @ ((vr.T @ big_m.T) / w[~zero][:, None])
        deflated = int(np.count_nonzero(zero))
    kc = big_l - big_m @ x
    kc = 0.5 * (kc + kc.T)
    return CondensationResult(kc, -x, keep, drop, deflated)


def format_number(x: float) -> str:
    r = repr(float(x))
    return "0.0" if r == "-0.0" else r


def format_matrix(a) -> str:
    """Matrix text format: ``rows cols`` header, then one space-separated row per line."""
    a = as_mat(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines.extend(" ".join(format_number(v) for v in row) for row in a)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty matrix document")
    try:
        nr, nc = (int(t) for t in rows[0])
    except ValueError as exc:
        raise ValueError("first line must be 'rows cols'") from exc
    body = rows[1:]
    if len(body) != nr or any(len(r) != nc for r in body):
        raise ValueError(f"expected {nr} rows of {nc} entries")
    return np.array([[float(t) for t in r] for r in body], dtype=float).reshape(nr, nc)
