"""Dense linear algebra kernels for greedy sparse recovery.

Column submatrix access, least squares through orthogonal (QR)
factorization, and an incremental QR that grows by a block of columns per
pursuit iteration. Normal equations are deliberately avoided in the
solvers (they only appear as an independent oracle in the test suite).

Matrices are plain float64 ndarrays, kept in column-major (Fortran) order
because every hot loop is a column dot product. Supports ("index sets")
are sorted 1-D integer arrays with no duplicates.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

# Relative diagonal threshold below which a triangular factor is treated
# as rank deficient. Conservative for float64 at desk scales (m <= 1e4).
RANK_TOL = 1e-10


class SingularSystemError(np.linalg.LinAlgError):
    """Selected columns are (numerically) linearly dependent."""


def as_matrix(a):
    """Validate and return a measurement matrix as a float64 F-ordered array.

    Requires a 2-D array with at least one row and one column and all
    entries finite.
    """
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {out.shape}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise ValueError(f"matrix must be at least 1x1, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    return np.asfortranarray(out)


def as_vector(v, length=None, name="vector"):
    """Validate a 1-D finite float64 vector, optionally of a fixed length."""
    out = np.asarray(v, dtype=np.float64).ravel()
    if length is not None and out.size != length:
        raise ValueError(f"{name} has length {out.size}, expected {length}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} entries must be finite")
    return out


def as_index_set(indices, n):
    """Validate column indices: sorted, distinct, each in [0, n)."""
    idx = np.asarray(indices, dtype=np.intp).ravel()
    if idx.size == 0:
        return idx
    if idx.min() < 0 or idx.max() >= n:
        raise ValueError(f"column index out of range [0, {n})")
    if np.any(np.diff(idx) <= 0):
        srt = np.sort(idx)
        if np.any(np.diff(srt) == 0):
            raise ValueError("duplicate column indices")
        idx = srt
    return idx


def correlations(Phi, r):
    """Column correlations Phi' r.

    Parameters
    ----------
    Phi : ndarray (m, n)
        Measurement matrix.
    r : ndarray (m,)
        Residual (or any m-vector).

    Returns
    -------
    ndarray (n,) with component j equal to <phi_j, r>.
    """
    Phi = np.asarray(Phi, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64).ravel()
    if Phi.ndim != 2:
        raise ValueError("Phi must be 2-D")
    if r.size != Phi.shape[0]:
        raise ValueError(f"residual has length {r.size}, expected {Phi.shape[0]}")
    return Phi.T @ r


@dataclass(frozen=True)
class LsSolution:
    """Least-squares solution restricted to a fixed support.

    coefficients are aligned with the sorted support; residual is the
    orthogonal-complement projection of y, so it is orthogonal to every
    selected column.
    """

    support: np.ndarray
    coefficients: np.ndarray
    residual: np.ndarray
    residual_norm: float

    def dense(self, n):
        """Length-n estimate: coefficients on the support, zero elsewhere."""
        x = np.zeros(n)
        x[self.support] = self.coefficients
        return x


def _check_diag(diag):
    """Raise if the triangular diagonal indicates rank deficiency."""
    mags = np.abs(diag)
    if mags.size and mags.min() < RANK_TOL * max(mags.max(), np.finfo(float).tiny):
        raise SingularSystemError(
            "rank-deficient subsystem: smallest factor diagonal "
            f"{mags.min():.3e} below {RANK_TOL:g} x largest {mags.max():.3e}"
        )


def least_squares(Phi, support, y):
    """Solve min ||y - Phi_support c||_2 by QR on the column submatrix.

    Parameters
    ----------
    Phi : ndarray (m, n)
    support : index set, |support| <= m, columns linearly independent
    y : ndarray (m,)

    Returns
    -------
    LsSolution

    Raises
    ------
    SingularSystemError
        If the selected columns are numerically rank deficient.
    """
    Phi = np.asarray(Phi, dtype=np.float64)
    m, n = Phi.shape
    y = as_vector(y, m, "y")
    support = as_index_set(support, n)
    if support.size == 0:
        r = y.copy()
        return LsSolution(support, np.zeros(0), r, float(np.linalg.norm(r)))
    if support.size > m:
        raise ValueError(f"support size {support.size} exceeds row count {m}")
    sub = Phi[:, support]
    q, rfac = np.linalg.qr(sub)
    _check_diag(np.diagonal(rfac))
    coef = solve_triangular(rfac, q.T @ y, lower=False)
    resid = y - sub @ coef
    return LsSolution(support, coef, resid, float(np.linalg.norm(resid)))


class IncrementalQR:
    """QR factorization of a growing column submatrix of a fixed matrix.

    Columns are appended in blocks (one block per pursuit iteration);
    the factors are updated by block Gram-Schmidt with one
    re-orthogonalization pass, so least-squares solutions derived from the
    state match a from-scratch factorization to ~1e-10.

    The state is single-owner mutable; everything else in this module is
    pure.
    """

    def __init__(self, Phi):
        self._Phi = np.asarray(Phi, dtype=np.float64)
        if self._Phi.ndim != 2:
            raise ValueError("Phi must be 2-D")
        m = self._Phi.shape[0]
        self._q = np.zeros((m, 0))
        self._r = np.zeros((0, 0))
        self._cols = []  # column indices in append order

    @property
    def columns(self):
        """Selected column indices in append order."""
        return list(self._cols)

    @property
    def size(self):
        return len(self._cols)

    def append(self, new):
        """Append the columns indexed by `new` (disjoint from the current set).

        Raises
        ------
        SingularSystemError
            If a new column lies (numerically) in the span of the current
            columns.
        """
        n = self._Phi.shape[1]
        new = as_index_set(new, n)
        if new.size == 0:
            return self
        if set(new.tolist()) & set(self._cols):
            raise ValueError("appended columns must be disjoint from current ones")
        v = self._Phi[:, new]
        c1 = self._q.T @ v
        w = v - self._q @ c1
        c2 = self._q.T @ w  # second pass: re-orthogonalize
        w = w - self._q @ c2
        q_new, r_new = np.linalg.qr(w)
        j = self._r.shape[0]
        s = new.size
        r = np.zeros((j + s, j + s))
        r[:j, :j] = self._r
        r[:j, j:] = c1 + c2
        r[j:, j:] = r_new
        _check_diag(np.diagonal(r))
        self._q = np.hstack([self._q, q_new])
        self._r = r
        self._cols.extend(int(i) for i in new)
        return self

    def project_out(self, y):
        """Residual of y against the span of the selected columns."""
        y = np.asarray(y, dtype=np.float64).ravel()
        return y - self._q @ (self._q.T @ y)

    def coefficients(self, y):
        """Least-squares coefficients for y, in append order."""
        y = np.asarray(y, dtype=np.float64).ravel()
        if not self._cols:
            return np.zeros(0)
        return solve_triangular(self._r, self._q.T @ y, lower=False)

    def least_squares(self, y):
        """Full LsSolution for y (support sorted ascending)."""
        y = as_vector(y, self._Phi.shape[0], "y")
        coef = self.coefficients(y)
        resid = self.project_out(y)
        support = np.asarray(self._cols, dtype=np.intp)
        order = np.argsort(support, kind="stable")
        return LsSolution(
            support[order], coef[order], resid, float(np.linalg.norm(resid))
        )


def append_columns(state, Phi, new):
    """Functional wrapper over IncrementalQR.append.

    `state=None` starts a fresh factorization of Phi restricted to `new`.
    """
    if state is None:
        state = IncrementalQR(Phi)
    elif state._Phi.shape != np.shape(Phi):
        raise ValueError("state was built for a matrix of different shape")
    return state.append(new)


# -- matrix file formats ------------------------------------------------

_BIN_HEADER = struct.Struct("<II")  # u32 rows, u32 cols, little endian


def load_matrix_csv(path):
    """Read a matrix from CSV: one row per line, comma-separated decimals."""
    data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return as_matrix(data)


def save_matrix_csv(Phi, path):
    np.savetxt(path, np.asarray(Phi, dtype=np.float64), delimiter=",")


def load_matrix_bin(path):
    """Read the raw binary format: 8-byte header (u32 rows, u32 cols,
    little endian) followed by float64 little-endian entries in
    column-major order."""
    with open(path, "rb") as fh:
        rows, cols = _BIN_HEADER.unpack(fh.read(_BIN_HEADER.size))
        flat = np.fromfile(fh, dtype="<f8", count=rows * cols)
    if flat.size != rows * cols:
        raise ValueError(f"binary matrix file truncated: {path}")
    return as_matrix(flat.reshape((rows, cols), order="F"))


def save_matrix_bin(Phi, path):
    Phi = as_matrix(Phi)
    with open(path, "wb") as fh:
        fh.write(_BIN_HEADER.pack(Phi.shape[0], Phi.shape[1]))
        Phi.astype("<f8").flatten(order="F").tofile(fh)


def load_vector_csv(path, length=None):
    """Read a vector from CSV (one value per line or one comma-separated row)."""
    data = np.loadtxt(path, delimiter=",", dtype=np.float64)
    return as_vector(data, length, name=str(path))
