"""Schur parameter arrays and the unitary upper Hessenberg matrix they define.

For alphas ``a_0..a_{n-1}`` in the open disk and ``tau`` on the circle, the
matrix ``G = G_0 G_1 ... G_n`` is built from 2x2 blocks
``[[conj(a), rho], [rho, -a]]`` with ``rho = sqrt(1 - |a|^2)`` and a final
diagonal factor ``diag(1, ..., 1, conj(tau))``.  Its characteristic polynomial
is the paraorthogonal polynomial of degree ``n + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import numerics as nm
from .errors import ConvergenceError, ParameterError, SpectrumCollisionError

TWO_PI = 2.0 * math.pi
DISK_MARGIN = 1e-12
CIRCLE_TOL = 1e-12


def normalize_angle(z) -> np.ndarray | float:
    """Argument of ``z`` in (0, 2*pi]; the point 1 maps to 2*pi."""
    a = np.angle(z)
    a = np.where(a <= 0.0, a + TWO_PI, a)
    if np.ndim(a) == 0:
        return float(a)
    return a


def wrap_pi(x):
    """Reduce an angle difference to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi
    y = np.where(y <= -math.pi, y + TWO_PI, y)
    return y if np.ndim(y) else float(y)


@dataclass(frozen=True)
class SchurParameters:
    alphas: np.ndarray
    tau: complex

    def __post_init__(self):
        alphas = np.atleast_1d(np.asarray(self.alphas, dtype=complex)).copy()
        alphas.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "tau", complex(self.tau))
        if alphas.size == 0:
            raise ParameterError("need at least one alpha (n >= 1)")
        if not np.all(np.isfinite(alphas)) or not np.isfinite(self.tau):
            raise ParameterError("parameters must be finite")
        mags = np.abs(alphas)
        bad = np.nonzero(mags >= 1.0 - DISK_MARGIN)[0]
        if bad.size:
            j = int(bad[0])
            raise ParameterError(f"alpha_{j} = {alphas[j]} is not inside the unit disk", index=j)
        if abs(abs(self.tau) - 1.0) > CIRCLE_TOL:
            raise ParameterError(f"tau = {self.tau} is not on the unit circle", index=len(alphas))

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def order(self) -> int:
        return len(self.alphas) + 1

    @property
    def rhos(self) -> np.ndarray:
        return np.sqrt(1.0 - np.abs(self.alphas) ** 2)

    def truncated(self, j: int, tau_j: complex) -> "SchurParameters | None":
        """The array (alpha_0..alpha_{j-1}, tau_j); None when j == 0."""
        if j == 0:
            return None
        return SchurParameters(self.alphas[:j], tau_j)

    def __eq__(self, other):
        if not isinstance(other, SchurParameters):
            return NotImplemented
        return np.array_equal(self.alphas, other.alphas) and self.tau == other.tau

    def __hash__(self):
        return hash((self.alphas.tobytes(), self.tau))


@dataclass(frozen=True)
class UnitaryHessenberg:
    matrix: np.ndarray
    source: SchurParameters

    @property
    def order(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EigenAngleSet:
    """Points on the circle sorted by argument in (0, 2*pi]."""

    angles: np.ndarray
    eigenvalues: np.ndarray
    vectors: np.ndarray | None = None
    ids: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.ids is None:
            object.__setattr__(self, "ids", np.arange(len(self.angles)))

    def __len__(self):
        return len(self.angles)


def angle_set(values, vectors=None) -> EigenAngleSet:
    values = np.asarray(values, dtype=complex)
    ang = normalize_angle(values)
    order = np.argsort(ang, kind="stable")
    vec = None if vectors is None else np.asarray(vectors)[:, order]
    return EigenAngleSet(np.asarray(ang)[order], values[order], vec)


def _givens_factor(order: int, j: int, alpha: complex) -> np.ndarray:
    F = np.eye(order, dtype=complex)
    rho = math.sqrt(max(0.0, 1.0 - abs(alpha) ** 2))
    F[j:j + 2, j:j + 2] = [[alpha.conjugate(), rho], [rho, -alpha]]
    return F


def hessenberg_product(params: SchurParameters) -> np.ndarray:
    """G as the literal product of its elementary factors."""
    m = params.order
    G = np.eye(m, dtype=complex)
    for j, a in enumerate(params.alphas):
        G = G @ _givens_factor(m, j, complex(a))
    G[:, -1] *= params.tau.conjugate()
    return G


def hessenberg_entries(params: SchurParameters) -> np.ndarray:
    """G from its closed-form entries.

    With ``conj(a_n) := conj(tau)`` and ``a_{-1} := -1``:
    ``G[i, k] = -a_{i-1} * rho_i ... rho_{k-1} * conj(a_k)`` for ``k >= i``
    and ``G[k+1, k] = rho_k``.
    """
    n = params.n
    ab = np.concatenate([params.alphas.conj(), [params.tau.conjugate()]])
    prev = np.concatenate([[-1.0], params.alphas])
    rho = params.rhos
    G = np.zeros((n + 1, n + 1), dtype=complex)
    for i in range(n + 1):
        prod = 1.0
        for k in range(i, n + 1):
            G[i, k] = -prev[i] * prod * ab[k]
            if k < n:
                prod *= rho[k]
        if i < n:
            G[i + 1, i] = rho[i]
    return G


def build_hessenberg(params: SchurParameters, cross_check: bool = True) -> UnitaryHessenberg:
    """G from the closed form, cross-checked against the factor product."""
    G = hessenberg_entries(params)
    if cross_check:
        prod = hessenberg_product(params)
        if nm.max_norm(G - prod) > 1e-13:
            raise ConvergenceError(
                f"product and closed form of G disagree by {nm.max_norm(G - prod):.2e}"
            )
    return UnitaryHessenberg(G, params)


def unitarity_residual(M: np.ndarray) -> float:
    return nm.max_norm(M.conj().T @ M - np.eye(M.shape[0]))


def recover_parameters(M, tol: float = 1e-10) -> SchurParameters:
    """Invert :func:`build_hessenberg` by peeling off one factor at a time."""
    G = nm.as_matrix(M)
    m = G.shape[0]
    if G.shape != (m, m) or m < 2:
        raise ParameterError(f"expected a square matrix of order >= 2, got shape {G.shape}")
    if unitarity_residual(G) > tol:
        raise ParameterError("matrix is not unitary")
    low = np.tril(G, -2)
    if nm.max_norm(low) > tol:
        raise ParameterError("matrix is not upper Hessenberg")
    sub = np.diag(G, -1)
    bad = np.nonzero(~((np.abs(sub.imag) <= tol) & (sub.real > tol)))[0]
    if bad.size:
        raise ParameterError(f"subdiagonal entry {int(bad[0])} is not strictly positive", index=int(bad[0]))
    W = G.copy()
    alphas = []
    for j in range(m - 1):
        a = complex(W[j, j]).conjugate()
        alphas.append(a)
        F = _givens_factor(m, j, a)
        W = F.conj().T @ W
    tau = complex(W[m - 1, m - 1]).conjugate()
    tau /= abs(tau)
    return SchurParameters(np.array(alphas), tau)


def popuc_eval(params: SchurParameters, z) -> complex:
    """det(zI - G) through the leading-minor recurrence for Hessenberg matrices."""
    return hessenberg_det(np.asarray(z) * np.eye(params.order) - build_hessenberg(params).matrix)


def hessenberg_det(B: np.ndarray) -> complex:
    """Determinant of an upper Hessenberg matrix by leading principal minors."""
    m = B.shape[0]
    f = [1.0 + 0j]
    for k in range(1, m + 1):
        acc = 0.0 + 0j
        prod = 1.0 + 0j
        # i runs k, k-1, ..., 1 (1-based); prod accumulates subdiagonal entries
        for i in range(k, 0, -1):
            acc += ((-1) ** (k - i)) * B[i - 1, k - 1] * prod * f[i - 1]
            if i > 1:
                prod *= B[i - 1, i - 2]
        f.append(acc)
    return complex(f[m])


def charpoly_coefficients(params: SchurParameters) -> np.ndarray:
    """Coefficients (ascending) of det(zI - G), via the same minor recurrence."""
    G = build_hessenberg(params).matrix
    m = G.shape[0]
    # B = zI - G as polynomial entries: diag [-G_kk, 1], others [-G_ik]
    f = [np.array([1.0 + 0j])]
    for k in range(1, m + 1):
        acc = np.zeros(k + 1, dtype=complex)
        prod = 1.0 + 0j
        for i in range(k, 0, -1):
            if i == k:
                entry = np.array([-G[k - 1, k - 1], 1.0])
            else:
                entry = np.array([-G[i - 1, k - 1]])
            term = np.convolve(entry, f[i - 1]) * prod * ((-1) ** (k - i))
            acc[: len(term)] += term
            if i > 1:
                prod *= -G[i - 1, i - 2]
        f.append(acc)
    return f[m]


def popuc_zeros(params: SchurParameters, tol: float = 1e-10) -> EigenAngleSet:
    """Zeros of the paraorthogonal polynomial as eigenvalues of G."""
    G = build_hessenberg(params).matrix
    dec = nm.general_eig(G)
    dev = np.abs(np.abs(dec.values) - 1.0)
    if np.any(dev > tol):
        raise ConvergenceError(f"eigenvalue off the unit circle by {dev.max():.2e}", partial=dec)
    return angle_set(dec.values, dec.vectors)


def circular_gaps(angles: np.ndarray) -> np.ndarray:
    """Gaps between consecutive sorted angles, the last one wrapping around."""
    a = np.sort(np.asarray(angles, dtype=float))
    return np.diff(np.concatenate([a, [a[0] + TWO_PI]]))


def schur_complement_check(params: SchurParameters, zeta: complex, j: int, G=None, refl=None, spectrum=None) -> float:
    """Max-norm gap between ``G11 - G12 (G22 - zeta I)^{-1} G21`` and the truncated G.

    ``G``, ``refl`` and ``spectrum`` may be passed in when already known.
    """
    from .tridiag import pseudo_reflections

    n = params.n
    if not 1 <= j <= n:
        raise ParameterError(f"j must satisfy 1 <= j <= n = {n}, got {j}")
    zeta = complex(zeta)
    if G is None:
        G = build_hessenberg(params).matrix
    if spectrum is None:
        spectrum = nm.general_eig(G).values
    if np.min(np.abs(np.asarray(spectrum) - zeta)) < 1e-10:
        raise SpectrumCollisionError("zeta must avoid spectrum")
    if refl is None:
        refl = pseudo_reflections(params, zeta)
    G11 = G[: j + 1, : j + 1]
    if j < n:
        G12 = G[: j + 1, j + 1:]
        G21 = G[j + 1:, : j + 1]
        G22 = G[j + 1:, j + 1:]
        lhs = G11 - G12 @ nm.solve(G22 - zeta * np.eye(n - j), G21)
    else:
        lhs = G11
    rhs = build_hessenberg(SchurParameters(params.alphas[:j], refl.tau(j)), cross_check=False).matrix
    return nm.max_norm(lhs - rhs)


def random_parameters(n: int, seed: int, radius: float = 0.95) -> SchurParameters:
    """Alphas uniform in the disk of the given radius, tau uniform on the circle."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    phi = rng.uniform(0.0, TWO_PI, n)
    psi = rng.uniform(0.0, TWO_PI)
    return SchurParameters(r * np.exp(1j * phi), complex(np.exp(1j * psi)))


def zero_parameters(n: int, tau: complex = 1.0) -> SchurParameters:
    return SchurParameters(np.zeros(n, dtype=complex), tau)


def as_parameters(alphas: Sequence[complex], tau: complex) -> SchurParameters:
    return SchurParameters(np.asarray(alphas, dtype=complex), tau)
