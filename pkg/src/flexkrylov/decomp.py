"""Flexible Golub-Kahan (FGK) and flexible Arnoldi decompositions.

After ``k`` FGK expansions with preconditioners ``L_1..L_k``::

    A Z_k     = U_{k+1} M_k        (M_k upper Hessenberg, (k+1) x k)
    A^T U_{k+1} = V_{k+1} T_{k+1}  (T_{k+1} upper triangular)

with ``Z_k = [L_1^{-1} v_1, ..., L_k^{-1} v_k]``.  The flexible Arnoldi
process gives ``A Zhat_k = Vhat_{k+1} Hhat_k`` for square ``A``.

Both processes grow one column per call.  Orthogonalization is classical
Gram-Schmidt applied twice against all previous basis vectors.
"""

from __future__ import annotations

import numpy as np

from .linop import ConfigurationError, LinearOperator

BREAKDOWN_TOL = 1e-14


def orthogonalize(q: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonalize ``w`` against the orthonormal columns of ``q`` (two passes).

    Returns the remainder and the accumulated projection coefficients.
    """
    if q.shape[1] == 0:
        return w, np.zeros(0)
    h = q.T @ w
    w = w - q @ h
    h2 = q.T @ w
    w = w - q @ h2
    return w, h + h2


def _grow(a: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    out = np.zeros(shape)
    out[tuple(slice(0, s) for s in a.shape)] = a
    return out


class FgkState:
    """Growing FGK factorization.  Use :func:`fgk_init` to create one.

    The public attributes ``U, V, Z, M, T`` are views of the leading blocks of
    preallocated buffers; they are invalidated by the next expansion.
    """

    def __init__(self, m: int, n: int, capacity: int = 32):
        self.m, self.n = m, n
        self._cap = max(int(capacity), 1)
        self._U = np.zeros((m, self._cap + 1))
        self._V = np.zeros((n, self._cap + 1))
        self._Z = np.zeros((n, self._cap))
        self._M = np.zeros((self._cap + 1, self._cap))
        self._T = np.zeros((self._cap + 1, self._cap + 1))
        self.k = 0
        self.beta1 = 0.0
        self.anorm = 0.0
        self.breakdown = False

    def _reserve(self, k: int):
        if k <= self._cap:
            return
        cap = max(k, 2 * self._cap)
        self._U = _grow(self._U, (self.m, cap + 1))
        self._V = _grow(self._V, (self.n, cap + 1))
        self._Z = _grow(self._Z, (self.n, cap))
        self._M = _grow(self._M, (cap + 1, cap))
        self._T = _grow(self._T, (cap + 1, cap + 1))
        self._cap = cap

    @property
    def U(self):
        return self._U[:, : self.k + 1]

    @property
    def V(self):
        return self._V[:, : self.k + 1]

    @property
    def Z(self):
        return self._Z[:, : self.k]

    @property
    def M(self):
        return self._M[: self.k + 1, : self.k]

    @property
    def T(self):
        return self._T[: self.k + 1, : self.k + 1]

    @property
    def t11(self) -> float:
        return float(self._T[0, 0])


def _finite(w: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(w)):
        raise FloatingPointError(f"non-finite values in {what}")
    return w


def fgk_init(a: LinearOperator, b, capacity: int = 32) -> FgkState:
    """Start the FGK process: ``u_1 = b/||b||`` and ``v_1 = A^T u_1 / t_11``."""
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != a.nrows:
        raise ConfigurationError(f"right-hand side has length {b.size}, operator has {a.nrows} rows")
    beta = float(np.linalg.norm(_finite(b, "b")))
    if beta == 0:
        raise ValueError("b is zero: nothing to solve")
    st = FgkState(a.nrows, a.ncols, capacity)
    st.beta1 = beta
    st._U[:, 0] = b / beta
    w = _finite(a.apply_adjoint(st._U[:, 0]), "A^T u_1")
    t11 = float(np.linalg.norm(w))
    st.anorm = t11
    if t11 == 0:
        st.breakdown = True
        return st
    st._T[0, 0] = t11
    st._V[:, 0] = w / t11
    return st


def fgk_expand(state: FgkState, a: LinearOperator, l_inverse: LinearOperator) -> tuple[FgkState, bool]:
    """Add one column to ``Z``, ``M`` and ``T``.

    Costs one product with ``A`` and one with ``A^T``.  Returns the state and
    a breakdown flag; after a breakdown the current subspace is still usable
    but cannot be expanded further.
    """
    if state.breakdown:
        raise RuntimeError("cannot expand an FGK state after breakdown")
    i = state.k
    state._reserve(i + 1)
    z = l_inverse.apply(state._V[:, i])
    state._Z[:, i] = z
    znorm = float(np.linalg.norm(z))
    w = _finite(a.apply(z), "A z")
    if znorm > 0:
        state.anorm = max(state.anorm, float(np.linalg.norm(w)) / znorm)
    w, h = orthogonalize(state._U[:, : i + 1], w)
    state._M[: i + 1, i] = h
    mnext = float(np.linalg.norm(w))
    state.k = i + 1
    if mnext <= BREAKDOWN_TOL * state.anorm * znorm:
        state.breakdown = True
        return state, True
    state._M[i + 1, i] = mnext
    state._U[:, i + 1] = w / mnext

    w = _finite(a.apply_adjoint(state._U[:, i + 1]), "A^T u")
    state.anorm = max(state.anorm, float(np.linalg.norm(w)))
    w, h = orthogonalize(state._V[:, : i + 1], w)
    state._T[: i + 1, i + 1] = h
    tnext = float(np.linalg.norm(w))
    if tnext <= BREAKDOWN_TOL * state.anorm:
        state.breakdown = True
        return state, True
    state._T[i + 1, i + 1] = tnext
    state._V[:, i + 1] = w / tnext
    return state, False


class ArnoldiState:
    """Growing flexible Arnoldi factorization ``A Zhat = Vhat Hhat``."""

    def __init__(self, n: int, capacity: int = 32):
        self.n = n
        self._cap = max(int(capacity), 1)
        self._V = np.zeros((n, self._cap + 1))
        self._Z = np.zeros((n, self._cap))
        self._H = np.zeros((self._cap + 1, self._cap))
        self.k = 0
        self.r0norm = 0.0
        self.anorm = 0.0
        self.breakdown = False

    def _reserve(self, k: int):
        if k <= self._cap:
            return
        cap = max(k, 2 * self._cap)
        self._V = _grow(self._V, (self.n, cap + 1))
        self._Z = _grow(self._Z, (self.n, cap))
        self._H = _grow(self._H, (cap + 1, cap))
        self._cap = cap

    @property
    def Vhat(self):
        return self._V[:, : self.k + 1]

    @property
    def Zhat(self):
        return self._Z[:, : self.k]

    @property
    def Hhat(self):
        return self._H[: self.k + 1, : self.k]


def arnoldi_init(a: LinearOperator, b, capacity: int = 32) -> ArnoldiState:
    """Start flexible Arnoldi with ``x_0 = 0``, so ``vhat_1 = b/||b||``."""
    if a.nrows != a.ncols:
        raise ConfigurationError(f"Arnoldi methods need a square operator, got {a.shape}")
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != a.nrows:
        raise ConfigurationError(f"right-hand side has length {b.size}, operator has {a.nrows} rows")
    r0 = float(np.linalg.norm(_finite(b, "b")))
    if r0 == 0:
        raise ValueError("b is zero: nothing to solve")
    st = ArnoldiState(a.nrows, capacity)
    st.r0norm = r0
    st._V[:, 0] = b / r0
    return st


def flex_arnoldi_expand(state: ArnoldiState, a: LinearOperator, l_inverse: LinearOperator) -> tuple[ArnoldiState, bool]:
    """One flexible Arnoldi step (one product with ``A``).  Returns ``(state, breakdown)``."""
    if state.breakdown:
        raise RuntimeError("cannot expand an Arnoldi state after breakdown")
    i = state.k
    state._reserve(i + 1)
    z = l_inverse.apply(state._V[:, i])
    state._Z[:, i] = z
    znorm = float(np.linalg.norm(z))
    w = _finite(a.apply(z), "A z")
    if znorm > 0:
        state.anorm = max(state.anorm, float(np.linalg.norm(w)) / znorm)
    w, h = orthogonalize(state._V[:, : i + 1], w)
    state._H[: i + 1, i] = h
    hnext = float(np.linalg.norm(w))
    state.k = i + 1
    if hnext <= BREAKDOWN_TOL * state.anorm * znorm:
        state.breakdown = True
        return state, True
    state._H[i + 1, i] = hnext
    state._V[:, i + 1] = w / hnext
    return state, False


def fgk_residuals(state: FgkState, a: LinearOperator) -> dict:
    """Defects of the FGK relations, computed with explicit products (diagnostic)."""
    k = state.k
    AZ = np.column_stack([a.apply(state.Z[:, j]) for j in range(k)]) if k else np.zeros((state.m, 0))
    ATU = np.column_stack([a.apply_adjoint(state.U[:, j]) for j in range(k + 1)])
    eye = np.eye(k + 1)
    return {
        "left": float(np.linalg.norm(AZ - state.U @ state.M)),
        "right": float(np.linalg.norm(ATU - state.V @ state.T)),
        "orth_u": float(np.linalg.norm(state.U.T @ state.U - eye)),
        "orth_v": float(np.linalg.norm(state.V.T @ state.V - eye)),
    }
