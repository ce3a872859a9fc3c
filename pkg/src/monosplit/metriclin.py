"""Dense vectors and symmetric positive definite maps.

Everything here is small and dense on purpose: problem dimensions stay in
the tens, so eigendecompositions are cheap and exactly reproducible.
"""

import numpy as np


def as_vector(x):
    """Coerce to a 1-D float array and reject non-finite entries."""
    v = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def operator_norm(K, tol=1e-10, max_iter=200000):
    """Largest singular value of a rectangular matrix.

    Power iteration on K^T K with a deterministic all-ones start so that
    repeated runs give the same digits. Falls back to a ramp start if the
    ones vector happens to be in the kernel.
    """
    K = np.asarray(K, dtype=float)
    if not np.all(np.isfinite(K)):
        raise ValueError("matrix has non-finite entries")
    if K.size == 0 or not K.any():
        return 0.0
    n = K.shape[1]
    x = np.ones(n) / np.sqrt(n)
    sigma = 0.0
    for _ in range(max_iter):
        y = K @ x
        x = K.T @ y
        nv = np.linalg.norm(x)
        if nv == 0.0:
            # start vector was orthogonal to every right singular vector
            # with nonzero singular value; restart deterministically
            x = np.linspace(1.0, 2.0, n)
            x /= np.linalg.norm(x)
            continue
        x /= nv
        new = np.sqrt(nv)
        if abs(new - sigma) <= tol * max(new, 1.0):
            return new
        sigma = new
    return sigma


class SpdMap:
    """A symmetric positive definite matrix with cached spectral data.

    Instances are immutable after construction; the eigendecomposition is
    computed lazily and reused for solves, roots and eigenvalue queries.
    """

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("SpdMap needs a square matrix")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        scale = np.abs(m).max()
        if scale > 0 and np.abs(m - m.T).max() > 1e-10 * scale:
            raise ValueError("matrix is not symmetric")
        self.matrix = 0.5 * (m + m.T)
        self.d = m.shape[0]
        self._eig = None
        if self.min_eigenvalue() <= 0.0:
            raise ValueError("matrix is not positive definite")

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d))

    @property
    def is_identity(self):
        return np.array_equal(self.matrix, np.eye(self.d))

    def _decomp(self):
        if self._eig is None:
            w, V = np.linalg.eigh(self.matrix)
            self._eig = (w, V)
        return self._eig

    def apply(self, x):
        return self.matrix @ as_vector(x)

    def solve(self, b):
        b = as_vector(b)
        x = np.linalg.solve(self.matrix, b)
        if np.linalg.norm(self.matrix @ x - b) > 1e-10 * max(np.linalg.norm(b), 1e-300):
            raise ArithmeticError("solve failed to reach tolerance; map may not be SPD")
        return x

    def inner(self, x, y):
        """Weighted inner product <Mx, y>."""
        return float(as_vector(x) @ self.matrix @ as_vector(y))

    def norm2(self, x):
        """Squared weighted norm <Mx, x>."""
        return self.inner(x, x)

    def norm_of(self, x):
        return np.sqrt(max(self.norm2(x), 0.0))

    def sqrt_apply(self, x):
        w, V = self._decomp()
        if w.min() <= 0:
            raise ArithmeticError("root undefined, matrix not positive definite")
        return V @ (np.sqrt(w) * (V.T @ as_vector(x)))

    def min_eigenvalue(self):
        w, _ = self._decomp()
        return float(w[0])

    def norm(self):
        """Operator norm (largest eigenvalue, since the map is SPD)."""
        w, _ = self._decomp()
        return float(w[-1])

    def shifted(self, c):
        """Plain matrix M - c*I, returned as an array (may be indefinite)."""
        return self.matrix - c * np.eye(self.d)


def min_eigenvalue_sym(m):
    """Smallest eigenvalue of a symmetric matrix given as a plain array."""
    m = np.asarray(m, dtype=float)
    scale = np.abs(m).max()
    if scale > 0 and np.abs(m - m.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    return float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])
