"""Dense linear-algebra kernel for greedy sparse recovery.

Selection operators (largest-magnitude index sets, hard thresholding),
least squares restricted to a column support, the ridge-on-a-subset
variant used by the verification suites, spectral norm by power
iteration, and the plain-text matrix/vector file format shared with the
CLI.

Indices are 0-based throughout the Python API.  The CLI and its JSON
output translate to 1-based indices at the boundary.
"""

import numpy as np

__all__ = [
    "FileFormatError",
    "IncrementalQRSolver",
    "hard_threshold",
    "load_matrix",
    "load_vector",
    "penalized_restricted_ls",
    "residual_gradient",
    "restrict_to_support",
    "restricted_least_squares",
    "save_matrix",
    "save_vector",
    "spectral_norm",
    "top_q_indices",
]

# Reciprocal of the condition-number estimate above which the QR path is
# abandoned for an SVD minimum-norm solve.
_COND_RECIP_LIMIT = 1e-12


def _as_vector(v, name="v"):
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def _as_matrix(A, name="A"):
    arr = np.asarray(A, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    return arr


def _as_support(indices, n, name="support"):
    """Normalize an index collection to a sorted, duplicate-free int array."""
    arr = np.unique(np.asarray(list(indices), dtype=np.int64))
    if arr.size and (arr[0] < 0 or arr[-1] >= n):
        raise ValueError(f"{name} contains indices outside [0, {n})")
    return arr


def _require_finite(*arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise ValueError("input contains NaN or Inf")


def top_q_indices(v, q):
    """Indices of the ``q`` largest magnitudes of ``v``, sorted ascending.

    Magnitude ties at the selection boundary are broken toward the
    smaller index (stable sort on exact float comparison), so the result
    is deterministic.
    """
    v = _as_vector(v)
    q = int(q)
    if q < 1 or q > v.size:
        raise ValueError(f"q must be in [1, {v.size}], got {q}")
    order = np.argsort(-np.abs(v), kind="stable")
    picked = order[:q]
    picked.sort()
    return picked


def hard_threshold(v, k):
    """Keep the ``k`` largest magnitudes of ``v``, zero the rest.

    ``k = 0`` returns the zero vector, ``k = len(v)`` returns a copy.
    """
    v = _as_vector(v)
    k = int(k)
    if k < 0 or k > v.size:
        raise ValueError(f"k must be in [0, {v.size}], got {k}")
    if k == 0:
        return np.zeros_like(v)
    if k == v.size:
        return v.copy()
    out = np.zeros_like(v)
    keep = top_q_indices(v, k)
    out[keep] = v[keep]
    return out


def restrict_to_support(v, support):
    """Zero every entry of ``v`` outside ``support``."""
    v = _as_vector(v)
    support = _as_support(support, v.size)
    out = np.zeros_like(v)
    out[support] = v[support]
    return out


def residual_gradient(A, y, x):
    """Gradient residual A^T (y - A x), the negative gradient of the
    squared-error metric at ``x``."""
    A = _as_matrix(A)
    y = _as_vector(y, "y")
    x = _as_vector(x, "x")
    m, n = A.shape
    if y.size != m or x.size != n:
        raise ValueError(
            f"dimension mismatch: A is {m}x{n}, y has length {y.size}, x has length {x.size}"
        )
    return A.T @ (y - A @ x)


def _solve_submatrix_ls(As, y):
    """Least-squares coefficients for a column submatrix.

    QR when the submatrix is tall and comfortably full rank, otherwise an
    SVD-based minimum-norm solve (rank deficiency, near-collinearity, or
    more columns than rows).
    """
    m, s = As.shape
    if s <= m:
        Q, R = np.linalg.qr(As)
        diag = np.abs(np.diag(R))
        if diag.size and diag.max() > 0 and diag.min() > _COND_RECIP_LIMIT * diag.max():
            return np.linalg.solve(R, Q.T @ y)
    return np.linalg.lstsq(As, y, rcond=None)[0]


def restricted_least_squares(A, y, support):
    """Minimize ||y - A z||_2 over vectors supported on ``support``.

    Returns the minimum-norm minimizer when the column submatrix is rank
    deficient.  An empty support returns the zero vector.  The first-order
    condition (A^T (y - A x))_support = 0 holds to solver tolerance.
    """
    A = _as_matrix(A)
    y = _as_vector(y, "y")
    if A.shape[0] != y.size:
        raise ValueError(f"dimension mismatch: A is {A.shape[0]}x{A.shape[1]}, y has length {y.size}")
    _require_finite(A, y)
    support = _as_support(support, A.shape[1])
    x = np.zeros(A.shape[1])
    if support.size == 0:
        return x
    x[support] = _solve_submatrix_ls(A[:, support], y)
    return x


def penalized_restricted_ls(A, y, support, penalized, sigma):
    """Minimize ||y - A z||^2 + sigma ||z_penalized||^2 over supp(z) in ``support``.

    ``penalized`` must be a subset of ``support``; sigma must be positive.
    Solved as an augmented least-squares system so the large penalty is
    never squared through normal equations.
    """
    A = _as_matrix(A)
    y = _as_vector(y, "y")
    if A.shape[0] != y.size:
        raise ValueError(f"dimension mismatch: A is {A.shape[0]}x{A.shape[1]}, y has length {y.size}")
    _require_finite(A, y)
    sigma = float(sigma)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    n = A.shape[1]
    support = _as_support(support, n)
    penalized = _as_support(penalized, n, name="penalized")
    if penalized.size and not np.isin(penalized, support).all():
        raise ValueError("penalized indices must be a subset of the support")
    if penalized.size == 0:
        return restricted_least_squares(A, y, support)
    As = A[:, support]
    positions = np.searchsorted(support, penalized)
    ridge = np.zeros((penalized.size, support.size))
    ridge[np.arange(penalized.size), positions] = np.sqrt(sigma)
    augmented = np.vstack([As, ridge])
    rhs = np.concatenate([y, np.zeros(penalized.size)])
    coef = np.linalg.lstsq(augmented, rhs, rcond=None)[0]
    x = np.zeros(n)
    x[support] = coef
    return x


def spectral_norm(A, tol=1e-10, max_iterations=100_000):
    """Largest singular value of ``A`` via power iteration on A^T A.

    The iteration stops once the eigenvalue estimate is stationary well
    below ``tol`` in relative terms, so the returned value is accurate to
    about ``tol`` even for clustered spectra.
    """
    A = _as_matrix(A)
    _require_finite(A)
    if A.size == 0 or not A.any():
        return 0.0
    n = A.shape[1]
    # Deterministic start; reseed in the (measure-zero) event the start
    # vector lies in the null space.
    for seed in range(3):
        v = np.random.default_rng(0x5EED + seed).standard_normal(n)
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        v /= nv
        lam = 0.0
        for _ in range(max_iterations):
            w = A.T @ (A @ v)
            nw = np.linalg.norm(w)
            if nw == 0:
                lam = 0.0
                break
            v = w / nw
            lam_new = float(v @ (A.T @ (A @ v)))
            if abs(lam_new - lam) <= 1e-3 * tol * max(lam_new, np.finfo(float).tiny):
                lam = lam_new
                break
            lam = lam_new
        if lam > 0:
            return float(np.sqrt(lam))
    return 0.0


class IncrementalQRSolver:
    """QR factorization of a column submatrix grown one column at a time.

    Appending a column costs O(m t) where t is the current support size,
    against O(m t^2) for a from-scratch refactorization.  Gram-Schmidt
    with one reorthogonalization pass keeps Q orthonormal to machine
    precision.  Near-dependent columns (or an estimated condition number
    above 1e12) flip ``degenerate``; callers should then fall back to
    :func:`restricted_least_squares`.

    ``extended`` returns a new solver, leaving the receiver untouched, so
    snapshots can be carried inside immutable iterate states.
    """

    def __init__(self, A, y):
        self._A = np.asarray(A, dtype=float)
        self._y = np.asarray(y, dtype=float)
        m = self._A.shape[0]
        self._Q = np.zeros((m, 0))
        self._R = np.zeros((0, 0))
        self._qty = np.zeros(0)
        self.columns = []
        self.degenerate = False
        self._diag_max = 0.0
        self._diag_min = np.inf

    def _clone(self):
        other = IncrementalQRSolver.__new__(IncrementalQRSolver)
        other._A = self._A
        other._y = self._y
        other._Q = self._Q.copy()
        other._R = self._R.copy()
        other._qty = self._qty.copy()
        other.columns = list(self.columns)
        other.degenerate = self.degenerate
        other._diag_max = self._diag_max
        other._diag_min = self._diag_min
        return other

    def extended(self, indices):
        """New solver with ``indices`` appended to the factored support."""
        new = self._clone()
        for j in indices:
            new._append(int(j))
        return new

    def _append(self, j):
        self.columns.append(j)
        if self.degenerate:
            return
        a = self._A[:, j]
        t = self._Q.shape[1]
        if t >= self._A.shape[0]:
            self.degenerate = True
            return
        r = self._Q.T @ a
        q = a - self._Q @ r
        # Second Gram-Schmidt pass restores orthogonality lost to cancellation.
        corr = self._Q.T @ q
        r = r + corr
        q = q - self._Q @ corr
        rho = float(np.linalg.norm(q))
        norm_a = float(np.linalg.norm(a))
        if rho <= 1e-12 * max(norm_a, np.finfo(float).tiny):
            self.degenerate = True
            return
        self._diag_max = max(self._diag_max, rho)
        self._diag_min = min(self._diag_min, rho)
        if self._diag_min <= _COND_RECIP_LIMIT * self._diag_max:
            self.degenerate = True
            return
        self._Q = np.column_stack([self._Q, q / rho])
        new_R = np.zeros((t + 1, t + 1))
        new_R[:t, :t] = self._R
        new_R[:t, t] = r
        new_R[t, t] = rho
        self._R = new_R
        self._qty = np.append(self._qty, (q / rho) @ self._y)

    def solve(self):
        """Full-length least-squares solution on the factored support.

        Returns None when the factorization went degenerate; callers must
        then re-solve from scratch.
        """
        if self.degenerate:
            return None
        x = np.zeros(self._A.shape[1])
        if self.columns:
            coef = np.linalg.solve(self._R, self._qty)
            x[np.asarray(self.columns, dtype=np.int64)] = coef
        return x


class FileFormatError(ValueError):
    """Malformed matrix/vector file; carries path and 1-based line number."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


def _parse_floats(tokens, path, line_no):
    values = []
    for tok in tokens:
        try:
            val = float(tok)
        except ValueError:
            raise FileFormatError(path, line_no, f"not a number: {tok!r}") from None
        if not np.isfinite(val):
            raise FileFormatError(path, line_no, f"non-finite value: {tok!r}")
        values.append(val)
    return values


def load_matrix(path):
    """Read a dense matrix: first line "m n", then m rows of n numbers."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].split():
        raise FileFormatError(path, 1, "expected header line 'm n'")
    header = lines[0].split()
    if len(header) != 2:
        raise FileFormatError(path, 1, f"expected header 'm n', got {lines[0]!r}")
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError:
        raise FileFormatError(path, 1, f"expected integer dimensions, got {lines[0]!r}") from None
    if m < 1 or n < 1:
        raise FileFormatError(path, 1, f"dimensions must be positive, got {m} x {n}")
    rows = []
    line_no = 1
    for raw in lines[1:]:
        line_no += 1
        tokens = raw.split()
        if not tokens:
            continue
        if len(rows) == m:
            raise FileFormatError(path, line_no, f"expected exactly {m} rows")
        if len(tokens) != n:
            raise FileFormatError(path, line_no, f"expected {n} entries, got {len(tokens)}")
        rows.append(_parse_floats(tokens, path, line_no))
    if len(rows) != m:
        raise FileFormatError(path, line_no, f"expected {m} rows, got {len(rows)}")
    return np.array(rows, dtype=float)


def load_vector(path):
    """Read a vector: first line "n", then n whitespace-separated numbers."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].split():
        raise FileFormatError(path, 1, "expected header line 'n'")
    header = lines[0].split()
    if len(header) != 1:
        raise FileFormatError(path, 1, f"expected header 'n', got {lines[0]!r}")
    try:
        n = int(header[0])
    except ValueError:
        raise FileFormatError(path, 1, f"expected integer length, got {lines[0]!r}") from None
    if n < 0:
        raise FileFormatError(path, 1, f"length must be nonnegative, got {n}")
    values = []
    line_no = 1
    for raw in lines[1:]:
        line_no += 1
        tokens = raw.split()
        if not tokens:
            continue
        if len(values) + len(tokens) > n:
            raise FileFormatError(path, line_no, f"expected exactly {n} entries")
        values.extend(_parse_floats(tokens, path, line_no))
    if len(values) != n:
        raise FileFormatError(path, line_no, f"expected {n} entries, got {len(values)}")
    return np.array(values, dtype=float)


def save_matrix(path, A):
    A = _as_matrix(A)
    _require_finite(A)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        for row in A:
            fh.write(" ".join(format(v, ".17g") for v in row) + "\n")


def save_vector(path, v):
    v = _as_vector(v)
    _require_finite(v)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{v.size}\n")
        fh.write(" ".join(format(x, ".17g") for x in v) + "\n")
