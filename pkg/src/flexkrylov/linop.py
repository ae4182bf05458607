"""Matrix-free linear operators.

Every solver in the package touches the forward model only through
:class:`LinearOperator`, i.e. through ``apply`` (x -> A x) and
``apply_adjoint`` (u -> A^T u).  Vectors are always dense float64 arrays;
sparse storage stays inside the operators that need it.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp


class ConfigurationError(ValueError):
    """Raised when operators or configurations are wired together inconsistently."""


class LinearOperator:
    """A linear map ``R^ncols -> R^nrows`` with its adjoint.

    Parameters
    ----------
    shape
        ``(nrows, ncols)``.
    matvec, rmatvec
        Callables implementing ``x -> A x`` and ``u -> A^T u``.  They receive
        a float64 vector of the right length and must not modify it.
    name
        Used in error messages and ``repr``.
    """

    def __init__(self, shape: tuple[int, int], matvec: Callable, rmatvec: Callable, name: str | None = None):
        nrows, ncols = (int(s) for s in shape)
        if nrows <= 0 or ncols <= 0:
            raise ConfigurationError(f"operator dimensions must be positive, got {shape}")
        self.shape = (nrows, ncols)
        self._matvec = matvec
        self._rmatvec = rmatvec
        self.name = name or type(self).__name__

    @property
    def nrows(self) -> int:
        return self.shape[0]

    @property
    def ncols(self) -> int:
        return self.shape[1]

    def __repr__(self):
        return f"<{self.name} {self.nrows}x{self.ncols}>"

    def apply(self, x) -> np.ndarray:
        x = _as_vector(x, self.ncols, self.name)
        return np.asarray(self._matvec(x), dtype=np.float64).reshape(self.nrows)

    def apply_adjoint(self, u) -> np.ndarray:
        u = _as_vector(u, self.nrows, self.name + "^T")
        return np.asarray(self._rmatvec(u), dtype=np.float64).reshape(self.ncols)

    @property
    def T(self) -> "LinearOperator":
        return LinearOperator((self.ncols, self.nrows), self.apply_adjoint, self.apply, name=self.name + "^T")

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            return compose([self, other])
        return self.apply(other)


def _as_vector(x, n: int, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        x = x.reshape(-1)
    if x.shape[0] != n:
        raise ConfigurationError(f"{name}: expected vector of length {n}, got {x.shape[0]}")
    return x


class MatrixOperator(LinearOperator):
    """Wraps a dense ndarray or a scipy sparse matrix."""

    def __init__(self, matrix, name: str | None = None):
        if sp.issparse(matrix):
            matrix = sp.csr_matrix(matrix, dtype=np.float64)
        else:
            matrix = np.asarray(matrix, dtype=np.float64)
            if matrix.ndim != 2:
                raise ConfigurationError("MatrixOperator needs a 2D array")
        self.matrix = matrix
        super().__init__(matrix.shape, lambda x: matrix @ x, lambda u: matrix.T @ u, name=name or "Matrix")


class DiagonalOperator(LinearOperator):
    """Diagonal scaling by a strictly positive vector."""

    def __init__(self, diag, name: str | None = None):
        diag = np.array(diag, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(diag)) or np.any(diag <= 0):
            raise ConfigurationError("DiagonalOperator entries must be finite and strictly positive")
        diag.setflags(write=False)
        self.diag = diag
        n = diag.size
        super().__init__((n, n), lambda x: diag * x, lambda u: diag * u, name=name or "Diagonal")

    def apply_inverse(self, x) -> np.ndarray:
        return _as_vector(x, self.ncols, self.name) / self.diag

    def inverse(self) -> "DiagonalOperator":
        return DiagonalOperator(1.0 / self.diag, name=self.name + "^-1")


class IdentityOperator(DiagonalOperator):
    def __init__(self, n: int):
        super().__init__(np.ones(int(n)), name="Identity")


class CountingOperator(LinearOperator):
    """Delegates to ``op`` and counts forward/adjoint applications."""

    def __init__(self, op: LinearOperator):
        self.op = op
        self.n_apply = 0
        self.n_adjoint = 0

        def mv(x):
            self.n_apply += 1
            return op.apply(x)

        def rmv(u):
            self.n_adjoint += 1
            return op.apply_adjoint(u)

        super().__init__(op.shape, mv, rmv, name=op.name)

    @property
    def matvecs(self) -> int:
        return self.n_apply + self.n_adjoint

    def reset(self):
        self.n_apply = self.n_adjoint = 0


def aslinearoperator(obj) -> LinearOperator:
    if isinstance(obj, LinearOperator):
        return obj
    return MatrixOperator(obj)


def compose(ops: Sequence[LinearOperator]) -> LinearOperator:
    """Product ``ops[0] @ ops[1] @ ... @ ops[-1]``, applied right to left."""
    ops = [aslinearoperator(o) for o in ops]
    if not ops:
        raise ConfigurationError("compose needs at least one operator")
    for i, (left, right) in enumerate(zip(ops[:-1], ops[1:])):
        if left.ncols != right.nrows:
            raise ConfigurationError(
                f"cannot compose {left!r} (position {i}) with {right!r} (position {i + 1}): "
                f"{left.ncols} columns vs {right.nrows} rows"
            )

    def mv(x):
        for op in reversed(ops):
            x = op.apply(x)
        return x

    def rmv(u):
        for op in ops:
            u = op.apply_adjoint(u)
        return u

    return LinearOperator((ops[0].nrows, ops[-1].ncols), mv, rmv, name="(" + " * ".join(o.name for o in ops) + ")")


def conjugate_by_transform(a: LinearOperator, psi: LinearOperator, psi_tilde: LinearOperator | None = None) -> LinearOperator:
    """Operator ``H = psi_tilde A psi^T`` acting on transform coefficients.

    ``psi`` (and ``psi_tilde`` when given) must be orthonormal, so that the
    inverse is the adjoint.  ``psi_tilde=None`` means the identity; FGK based
    solvers see the same ``H^T H`` for any orthonormal ``psi_tilde``.
    """
    a = aslinearoperator(a)
    if psi.nrows != psi.ncols or psi.ncols != a.ncols:
        raise ConfigurationError(f"transform {psi!r} does not match the domain of {a!r}")
    ops = [a, psi.T]
    if psi_tilde is not None:
        if psi_tilde.nrows != psi_tilde.ncols or psi_tilde.ncols != a.nrows:
            raise ConfigurationError(f"transform {psi_tilde!r} does not match the range of {a!r}")
        ops.insert(0, psi_tilde)
    return compose(ops)


def to_dense(a: LinearOperator) -> np.ndarray:
    """Assemble ``a`` column by column.  Only sensible for small operators."""
    if isinstance(a, MatrixOperator):
        m = a.matrix
        return m.toarray() if sp.issparse(m) else m.copy()
    out = np.empty(a.shape)
    e = np.zeros(a.ncols)
    for j in range(a.ncols):
        e[j] = 1.0
        out[:, j] = a.apply(e)
        e[j] = 0.0
    return out


def estimate_norm(a: LinearOperator, iterations: int = 30, seed: int = 0) -> float:
    """Largest singular value of ``a`` from ``iterations`` Golub-Kahan steps.

    Each step costs one product with ``A`` and one with ``A^T`` (the same as a
    power-iteration step on ``A^T A``) but the Ritz value converges much
    faster.  Full reorthogonalization keeps the small bidiagonal honest.
    """
    rng = np.random.default_rng(seed)
    k = max(1, min(int(iterations), a.nrows, a.ncols))
    v = rng.standard_normal(a.ncols)
    v /= np.linalg.norm(v)
    U, V = [], [v]
    alphas, betas = [], []
    for _ in range(k):
        u = a.apply(V[-1])
        if U:
            u -= betas[-1] * U[-1]
            Um = np.column_stack(U)
            u -= Um @ (Um.T @ u)
        alpha = float(np.linalg.norm(u))
        if alpha == 0:
            break
        U.append(u / alpha)
        alphas.append(alpha)
        w = a.apply_adjoint(U[-1]) - alpha * V[-1]
        Vm = np.column_stack(V)
        w -= Vm @ (Vm.T @ w)
        beta = float(np.linalg.norm(w))
        if beta <= 1e-14 * alpha:
            break
        betas.append(beta)
        V.append(w / beta)
    if not alphas:
        return 0.0
    j = len(alphas)
    B = np.diag(alphas) + np.diag(betas[: j - 1], 1)
    return float(np.linalg.norm(B, 2))


def adjoint_mismatch(a: LinearOperator, trials: int = 20, seed: int = 0, norm_estimate: float | None = None) -> float:
    """Largest ``|<Av,u> - <v,A^T u>| / (|u| |v| |A|)`` over random trials."""
    rng = np.random.default_rng(seed)
    anorm = norm_estimate if norm_estimate is not None else estimate_norm(a, iterations=10, seed=seed)
    anorm = max(anorm, np.finfo(float).tiny)
    worst = 0.0
    for _ in range(trials):
        v = rng.standard_normal(a.ncols)
        u = rng.standard_normal(a.nrows)
        gap = abs(a.apply(v) @ u - v @ a.apply_adjoint(u))
        worst = max(worst, gap / (np.linalg.norm(u) * np.linalg.norm(v) * anorm))
    return worst
