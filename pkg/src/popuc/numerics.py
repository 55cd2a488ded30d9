"""Small dense complex linear algebra kernel.

Everything here works on ``numpy`` arrays of dtype ``complex128`` and is sized
for matrices of order at most a few dozen: Cholesky with a shift, a cyclic
Jacobi Hermitian eigensolver, Householder/QR for general matrices, Aberth
iteration for polynomial roots and a pivoted linear solver.  Only array
arithmetic is borrowed from numpy; its ``linalg`` module is not used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConvergenceError, NotPositiveDefiniteError, SingularMatrixError

EPS = np.finfo(float).eps
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

POSITIVE = "positive"
NEGATIVE = "negative"
INDEFINITE = "indefinite"


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray  # columns, unit 2-norm

    def __len__(self):
        return len(self.values)


class CholeskyResult(NamedTuple):
    """Outcome of :func:`cholesky`; ``factor`` is None on failure."""

    factor: Optional[np.ndarray]
    failed_pivot: Optional[int]

    @property
    def ok(self) -> bool:
        return self.factor is not None


def as_matrix(M) -> np.ndarray:
    A = np.array(M, dtype=complex)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {A.shape}")
    return A


def max_norm(M) -> float:
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def fro_norm(M) -> float:
    M = np.asarray(M)
    return float(np.sqrt(np.sum(np.abs(M) ** 2)))


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return (A + A.conj().T) / 2


def skew_part(A: np.ndarray) -> np.ndarray:
    """K in A = H + iK."""
    return (A - A.conj().T) / 2j


def as_hermitian(M, tol: float = 1e-12) -> np.ndarray:
    """Validate that ``M`` is Hermitian and return it exactly symmetrized."""
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"Hermitian matrix must be square, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, max_norm(A))
    if max_norm(A - A.conj().T) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    return hermitian_part(A)


def cholesky(M, shift: float = 0.0) -> CholeskyResult:
    """Cholesky factor of ``M - shift*I``.

    A nonpositive pivot is reported through ``failed_pivot``; NaN input raises.
    """
    A = as_matrix(M)
    if not (np.all(np.isfinite(A)) and math.isfinite(shift)):
        raise ValueError("cholesky: non-finite input")
    n = A.shape[0]
    A = hermitian_part(A) - shift * np.eye(n)
    L = np.zeros((n, n), dtype=complex)
    for k in range(n):
        row = L[k, :k]
        d = A[k, k].real - float(np.sum(np.abs(row) ** 2))
        if not d > 0.0:
            return CholeskyResult(None, k)
        lkk = math.sqrt(d)
        L[k, k] = lkk
        if k + 1 < n:
            L[k + 1:, k] = (A[k + 1:, k] - L[k + 1:, :k] @ row.conj()) / lkk
    return CholeskyResult(L, None)


def definiteness(M, rel: float = 1e-10, atol: float = 0.0) -> str:
    """Classify a Hermitian matrix as positive, negative or indefinite.

    Uses Cholesky of ``M - delta*I`` and ``-M - delta*I`` with
    ``delta = max(rel*||M||_max, atol)``.  The zero matrix is indefinite.
    """
    A = hermitian_part(as_matrix(M))
    delta = max(rel * max_norm(A), atol)
    if cholesky(A, delta).ok:
        return POSITIVE
    if cholesky(-A, delta).ok:
        return NEGATIVE
    return INDEFINITE


# -- Hermitian eigenproblem ------------------------------------------------


def hermitian_eig(M, tol: float = 1e-15, max_sweeps: int = 60) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Values are real and ascending; the vector matrix is unitary.
    """
    A = as_hermitian(M, tol=1e-10).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = fro_norm(A)
    if n <= 1 or scale == 0.0:
        return EigenDecomposition(np.real(np.diag(A)).copy(), V)
    target = tol * scale
    for sweep in range(max_sweeps):
        off = fro_norm(A - np.diag(np.diag(A)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300 or mag < EPS * 1e-3 * scale:
                    continue
                phase = apq / mag
                app, aqq = A[p, p].real, A[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                ph = phase.conjugate()
                J = np.array([[c, s], [-s * ph, c * ph]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                V[:, idx] = V[:, idx] @ J
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
    else:
        raise ConvergenceError(
            f"Jacobi did not converge in {max_sweeps} sweeps "
            f"(off-diagonal norm {fro_norm(A - np.diag(np.diag(A))):.3e})",
            partial=np.real(np.diag(A)).copy(),
        )
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order].copy(), V[:, order].copy())


def hermitian_sqrt(M, tol: float = 1e-10) -> np.ndarray:
    """Positive square root of a Hermitian positive definite matrix."""
    A = as_hermitian(M, tol=1e-10)
    chol = cholesky(A, tol * max_norm(A))
    if not chol.ok:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (pivot {chol.failed_pivot})",
            pivot=chol.failed_pivot,
        )
    dec = hermitian_eig(A)
    vals = np.sqrt(np.maximum(dec.values, 0.0))
    R = (dec.vectors * vals) @ dec.vectors.conj().T
    return hermitian_part(R)


# -- linear systems --------------------------------------------------------


def _lu(M: np.ndarray, singular_rel: Optional[float]):
    A = M.copy()
    n = A.shape[0]
    perm = np.arange(n)
    scale = max_norm(M)
    floor = (singular_rel or 0.0) * scale
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[p, k]) <= floor or A[p, k] == 0:
            if singular_rel is not None:
                raise SingularMatrixError(
                    f"numerically singular matrix (pivot {abs(A[p, k]):.3e} at column {k})"
                )
            A[p, k] = EPS * max(scale, 1e-300)
        if p != k:
            A[[k, p]] = A[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        if k + 1 < n:
            A[k + 1:, k] /= A[k, k]
            A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
    return A, perm


def _lu_apply(LU: np.ndarray, perm: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = LU.shape[0]
    x = b[perm].astype(complex)
    for k in range(n):
        x[k + 1:] -= np.multiply.outer(LU[k + 1:, k], x[k])
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - LU[k, k + 1:] @ x[k + 1:]) / LU[k, k]
    return x


def solve(M, b, singular_rel: float = 1e-14) -> np.ndarray:
    """Solve ``M x = b`` by Gaussian elimination with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"solve needs a square matrix, got {A.shape}")
    rhs = np.asarray(b, dtype=complex)
    if rhs.shape[0] != A.shape[0]:
        raise ValueError("right-hand side does not match matrix order")
    LU, perm = _lu(A, singular_rel)
    return _lu_apply(LU, perm, rhs)


def inverse(M) -> np.ndarray:
    A = as_matrix(M)
    return solve(A, np.eye(A.shape[0], dtype=complex))


# -- general eigenproblem --------------------------------------------------


def hessenberg(M) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity)."""
    A = as_matrix(M)
    n = A.shape[0]
    for k in range(n - 2):
        x = A[k + 1:, k]
        alpha = fro_norm(x)
        if alpha == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        vnorm = fro_norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        A[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ A[k + 1:, k:])
        A[:, k + 1:] -= 2.0 * np.outer(A[:, k + 1:] @ v, v.conj())
        A[k + 2:, k] = 0.0
    return A


def _givens(a: complex, b: complex):
    r = math.hypot(abs(a), abs(b))
    if r == 0.0:
        return np.eye(2, dtype=complex)
    c, s = a / r, b / r
    return np.array([[c.conjugate(), s.conjugate()], [-s, c]])


def _wilkinson(block: np.ndarray) -> complex:
    a, b = block[0, 0], block[0, 1]
    c, d = block[1, 0], block[1, 1]
    half = (a - d) / 2
    disc = np.sqrt(half * half + b * c)
    mu1 = (a + d) / 2 + disc
    mu2 = (a + d) / 2 - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def schur_eigenvalues(M, max_sweeps: Optional[int] = None) -> np.ndarray:
    """Eigenvalues by Hessenberg reduction and shifted QR with deflation."""
    H = hessenberg(M)
    n = H.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    cap = max_sweeps if max_sweeps is not None else 40 * n
    hi = n - 1
    sweeps = 0
    since_deflation = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            sub = abs(H[lo, lo - 1])
            if sub <= EPS * (abs(H[lo, lo]) + abs(H[lo - 1, lo - 1])) or sub < 1e-300:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            since_deflation = 0
            continue
        if sweeps >= cap:
            raise ConvergenceError(
                f"QR iteration did not converge in {cap} sweeps",
                partial=np.diag(H)[hi + 1:].copy(),
            )
        sweeps += 1
        since_deflation += 1
        if since_deflation % 11 == 10:
            mu = H[hi, hi] + abs(H[hi, hi - 1]) * (0.75 + 0.5j)
        else:
            mu = _wilkinson(H[hi - 1:hi + 1, hi - 1:hi + 1])
        W = H[lo:hi + 1, lo:hi + 1]
        m = W.shape[0]
        W -= mu * np.eye(m)
        rots = []
        for k in range(m - 1):
            g = _givens(W[k, k], W[k + 1, k])
            W[k:k + 2, k:] = g @ W[k:k + 2, k:]
            W[k + 1, k] = 0.0
            rots.append(g)
        for k, g in enumerate(rots):
            W[:k + 2, k:k + 2] = W[:k + 2, k:k + 2] @ g.conj().T
        W += mu * np.eye(m)
    return np.diag(H).copy()


def _inverse_iteration(A: np.ndarray, lam: complex, scale: float, steps: int = 2) -> np.ndarray:
    n = A.shape[0]
    shift = lam + 1e2 * EPS * max(scale, 1e-300)
    LU, perm = _lu(A - shift * np.eye(n), None)
    rng = np.random.default_rng(n)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= fro_norm(v)
    for _ in range(steps):
        w = _lu_apply(LU, perm, v)
        nrm = fro_norm(w)
        if not math.isfinite(nrm) or nrm == 0.0:
            break
        v = w / nrm
    # fix phase so the largest entry is real positive
    i = int(np.argmax(np.abs(v)))
    if v[i] != 0:
        v = v * (abs(v[i]) / v[i])
    return v


def general_eig(M, res_tol: float = 1e-9, vectors: bool = True) -> EigenDecomposition:
    """Eigenvalues and unit eigenvectors of a square complex matrix.

    With ``vectors=False`` only the shifted-QR eigenvalues are returned
    (``vectors`` is None) and the residual check is skipped.
    """
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"general_eig needs a square matrix, got {A.shape}")
    n = A.shape[0]
    if not np.all(np.isfinite(A)):
        raise ValueError("general_eig: non-finite input")
    vals = schur_eigenvalues(A)
    if not vectors:
        return EigenDecomposition(vals, None)
    scale = fro_norm(A)
    V = np.empty((n, n), dtype=complex)
    for k, lam in enumerate(vals):
        V[:, k] = _inverse_iteration(A, lam, scale)
        # Rayleigh-type refinement of the value from the refined vector
        v = V[:, k]
        vals[k] = (v.conj() @ (A @ v)) / (v.conj() @ v)
    res = np.array([fro_norm(A @ V[:, k] - vals[k] * V[:, k]) for k in range(n)])
    bad = np.nonzero(res > res_tol * max(scale, 1e-300))[0]
    if bad.size:
        raise ConvergenceError(
            f"eigenpair residual {res.max():.3e} exceeds {res_tol:g}*||M|| for {bad.size} pair(s)",
            partial=EigenDecomposition(vals, V),
        )
    return EigenDecomposition(vals, V)


# -- polynomials -----------------------------------------------------------


def poly_eval(coeffs, z):
    """Horner evaluation; ``coeffs`` in ascending powers."""
    c = np.asarray(coeffs, dtype=complex)
    acc = np.zeros_like(np.asarray(z, dtype=complex)) + c[-1]
    for a in c[-2::-1]:
        acc = acc * z + a
    return acc


def _poly_eval_with_derivative(c: np.ndarray, z: np.ndarray):
    p = np.full_like(z, c[-1])
    dp = np.zeros_like(z)
    for a in c[-2::-1]:
        dp = dp * z + p
        p = p * z + a
    return p, dp


def poly_roots(coeffs, tol: float = 1e-10, max_sweeps: int = 100) -> np.ndarray:
    """All roots of a polynomial given in ascending powers, by Aberth iteration.

    Starting points lie on the circle of radius ``|a0/ad|**(1/d)`` with
    golden-angle spacing; every root gets one Newton polish at the end.
    """
    c = np.asarray(coeffs, dtype=complex)
    c = np.trim_zeros(c, "b")
    d = len(c) - 1
    if d < 1:
        raise ValueError("poly_roots needs degree >= 1 with nonzero leading coefficient")
    if not np.all(np.isfinite(c)):
        raise ValueError("poly_roots: non-finite coefficients")
    if d == 1:
        return np.array([-c[0] / c[1]])
    c = c / c[-1]
    radius = abs(c[0]) ** (1.0 / d) if c[0] != 0 else 0.5
    if radius == 0.0 or not math.isfinite(radius):
        radius = 0.5
    k = np.arange(d)
    z = radius * np.exp(1j * (GOLDEN_ANGLE * k + 0.4))

    def scale_at(w):
        return np.abs(poly_eval(np.abs(c), np.abs(w))) + 1e-300

    for _ in range(max_sweeps):
        p, dp = _poly_eval_with_derivative(c, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        ratio = p / np.where(dp == 0, 1e-300, dp)
        step = ratio / (1.0 - ratio * inv.sum(axis=1))
        z = z - step
        if np.all(np.abs(poly_eval(c, z)) <= EPS * 4 * scale_at(z)) or np.all(
            np.abs(step) <= EPS * np.maximum(np.abs(z), 1e-300)
        ):
            break
    p, dp = _poly_eval_with_derivative(c, z)
    ok = dp != 0
    z = np.where(ok, z - p / np.where(ok, dp, 1.0), z)
    resid = np.abs(poly_eval(c, z)) / scale_at(z)
    if np.any(resid > tol):
        raise ConvergenceError(
            f"Aberth iteration did not converge (relative residual {resid.max():.3e})",
            partial=z,
        )
    return z


def poly_from_roots(roots) -> np.ndarray:
    """Monic coefficients (ascending) of prod (z - r)."""
    c = np.array([1.0 + 0j])
    for r in roots:
        c = np.concatenate([[0.0], c]) - r * np.concatenate([c, [0.0]])
    return c


def companion(coeffs) -> np.ndarray:
    """Companion matrix of a polynomial in ascending powers."""
    c = np.asarray(coeffs, dtype=complex)
    d = len(c) - 1
    C = np.zeros((d, d), dtype=complex)
    C[1:, :-1] = np.eye(d - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return C
