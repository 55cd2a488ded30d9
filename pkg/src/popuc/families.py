"""Built-in parameter families.

* :class:`HypergeometricFamily` gives betas ``(j + a - i b) lambda_{j+1}`` at
  zeta = 1; its zeros are those of the hypergeometric polynomial ``r_{n+1}``.
* :class:`Table1Family` is the tridiagonal Toeplitz dissipative family
  ``H = t I + T``, ``K = diag(pi + cos(t)/k) + T`` with ``T`` the 0/1 shift sum.
* Linear synthetic families and tabulated families read from files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import numerics as nm
from .errors import FamilyError, ParameterError
from .monotone import MatrixFamily, ParameterPathFamily, SchurFamily
from .schur import SchurParameters
from .tridiag import DIRECT, BetaSequence, principal_sqrt


# -- hypergeometric --------------------------------------------------------


def jacobi_lambdas(a: float, n: int, lambda1: float = 1.0) -> np.ndarray:
    """lambda_1..lambda_{n+1} from j (2a + j - 1) lambda_j lambda_{j+1} = 1."""
    lam = np.empty(n + 1)
    lam[0] = lambda1
    for j in range(1, n + 1):
        lam[j] = 1.0 / (j * (2 * a + j - 1) * lam[j - 1])
    return lam


def hypergeometric_polynomial(a: float, b: float, m: int, z):
    """r_m(z) from r_{j+1} = ((a+j-ib) + (a+j+ib) z) r_j - j (2a+j-1) z r_{j-1}."""
    if m < 0:
        raise ValueError("degree must be >= 0")
    z = np.asarray(z, dtype=complex)
    prev = np.zeros_like(z)
    cur = np.ones_like(z)
    for j in range(m):
        prev, cur = cur, ((a + j - 1j * b) + (a + j + 1j * b) * z) * cur - j * (2 * a + j - 1) * z * prev
    return cur if cur.ndim else complex(cur)


def hypergeometric_coefficients(a: float, b: float, m: int) -> np.ndarray:
    """Ascending coefficients of r_m."""
    prev = np.zeros(1, dtype=complex)
    cur = np.ones(1, dtype=complex)
    for j in range(m):
        nxt = np.convolve([a + j - 1j * b, a + j + 1j * b], cur)
        nxt[1:len(prev) + 1] -= j * (2 * a + j - 1) * prev
        prev, cur = cur, nxt
    return cur


def hypergeometric_zeros(a: float, b: float, m: int) -> np.ndarray:
    return nm.poly_roots(hypergeometric_coefficients(a, b, m))


class HypergeometricFamily(SchurFamily):
    """Betas given directly (no Schur parameters) at zeta = 1, variable t = b."""

    def __init__(self, a: float, n: int, lambda1: float = 1.0):
        if not a > 0:
            raise FamilyError(f"hypergeometric family needs a > 0, got {a}")
        if n < 1:
            raise FamilyError(f"hypergeometric family needs n >= 1, got {n}")
        if not lambda1 > 0:
            raise FamilyError("lambda1 must be positive")
        super().__init__(1.0, 1.0, name=f"hypergeom(a={a:g}, n={n})")
        self.a = float(a)
        self.n = int(n)
        self.lambdas = jacobi_lambdas(self.a, self.n, lambda1)
        r1 = hypergeometric_polynomial(self.a, 0.0, self.n + 1, 1.0)
        scale = float(np.sum(np.abs(hypergeometric_coefficients(self.a, 0.0, self.n + 1))))
        # r_{n+1}(1) does not depend on b
        if abs(r1) <= 1e-10 * scale:
            raise FamilyError("r_{n+1} vanishes at z = 1; zeta = 1 is not admissible")

    def beta(self, t, zeta=None) -> BetaSequence:
        if zeta is not None and abs(complex(zeta) - 1.0) > 1e-15:
            raise FamilyError("hypergeometric family is defined at zeta = 1 only")
        j = np.arange(self.n + 1)
        vals = (j + self.a - 1j * float(t)) * self.lambdas
        return BetaSequence(1.0, 1.0, vals, DIRECT)

    def zeros(self, b: float) -> np.ndarray:
        """Zeros of r_{n+1} from the scalar recurrence."""
        return hypergeometric_zeros(self.a, b, self.n + 1)

    def choose_zeta(self, t):
        return 1.0 + 0j

    def with_zeta(self, zeta, zeta_sqrt=None):
        if abs(complex(zeta) - 1.0) > 1e-15:
            raise FamilyError("hypergeometric family is defined at zeta = 1 only")
        return self


def hypergeometric_family(a: float, n: int) -> HypergeometricFamily:
    return HypergeometricFamily(a, n)


@dataclass(frozen=True)
class ChainSequenceResult:
    ok: bool
    s: np.ndarray
    g: np.ndarray
    failed_index: Optional[int] = None


def chain_sequence_check(a: float, n: int) -> ChainSequenceResult:
    """Constructive chain-sequence test for the Hermitian part at zeta = 1.

    With diagonal h_j = (a + j) lambda_{j+1} and off-diagonal -1/2 the sequence is
    s_j = 1 / (4 h_{j-1} h_j) = j (2a + j - 1) / (4 (a + j - 1)(a + j)), j = 1..n.
    g_0 = 0 and g_j = s_j / (1 - g_{j-1}); the matrix is positive definite
    exactly when every g_j stays in (0, 1).
    """
    if not a > 0:
        raise FamilyError(f"chain-sequence check needs a > 0, got {a}")
    j = np.arange(1, n + 1, dtype=float)
    s = j * (2 * a + j - 1) / (4 * (a + j - 1) * (a + j))
    g = np.zeros(n + 1)
    for k in range(1, n + 1):
        g[k] = s[k - 1] / (1.0 - g[k - 1])
        if not 0.0 < g[k] < 1.0:
            return ChainSequenceResult(False, s, g[: k + 1], k)
    return ChainSequenceResult(True, s, g)


# -- the tridiagonal Toeplitz example ---------------------------------------


class Table1Family(MatrixFamily):
    """A(t) = H(t) + i K(t), both tridiagonal with unit off-diagonals."""

    def __init__(self, n: int = 5):
        if n < 2:
            raise FamilyError(f"table1 family needs n >= 2, got {n}")
        self.n = int(n)
        self._T = np.eye(n, k=1) + np.eye(n, k=-1)
        self._k = np.arange(1, n + 1, dtype=float)
        super().__init__(self.matrix, name=f"table1(n={n})")

    def H(self, t: float) -> np.ndarray:
        return float(t) * np.eye(self.n) + self._T

    def K(self, t: float) -> np.ndarray:
        return np.diag(math.pi + math.cos(float(t)) / self._k) + self._T

    def matrix(self, t: float) -> np.ndarray:
        return self.H(t) + 1j * self.K(t)

    def parts(self, t):
        return self.H(t).astype(complex), self.K(t).astype(complex)

    def dK_exact(self, t: float) -> np.ndarray:
        return np.diag(-math.sin(float(t)) / self._k)


def table1_family(n: int = 5) -> Table1Family:
    return Table1Family(n)


# -- synthetic families ----------------------------------------------------


class LinearBetaFamily(SchurFamily):
    """beta_j(t) = beta_j + t * slope_j at a fixed zeta."""

    def __init__(self, beta0: Sequence[complex], slope: Sequence[complex], zeta: complex = 1.0,
                 zeta_sqrt: Optional[complex] = None, name: str = "linear-beta"):
        super().__init__(zeta, zeta_sqrt, name=name)
        self.beta0 = np.asarray(beta0, dtype=complex)
        self.slope = np.asarray(slope, dtype=complex)
        if self.beta0.shape != self.slope.shape or self.beta0.ndim != 1:
            raise FamilyError("beta0 and slope must be 1-D of equal length")

    def beta(self, t, zeta=None):
        z = self.require_zeta(zeta)
        s = self.zeta_sqrt if zeta is None else principal_sqrt(z)
        try:
            return BetaSequence(z, s, self.beta0 + float(t) * self.slope, DIRECT)
        except ParameterError as exc:
            raise FamilyError(f"{self.name}: invalid betas at t={t}: {exc}") from exc


def constant_beta_family(beta0: Sequence[complex], zeta: complex = 1.0) -> LinearBetaFamily:
    b = np.asarray(beta0, dtype=complex)
    return LinearBetaFamily(b, np.zeros_like(b), zeta, name="constant-beta")


def random_beta_family(n: int, seed: int, zeta: complex = 1.0) -> LinearBetaFamily:
    """A synthetic beta family on t in [0, 2] with random rate signs.

    The normalized betas w_j have Re(w_j) >= 1.5 and |Im(w_j)| >= 1.5 at t = 0,
    so H and (initially) K are diagonally dominant.  The seed picks whether
    H, K or both vary.
    """
    rng = np.random.default_rng(seed)
    m = n + 1
    s = principal_sqrt(zeta)
    mode = int(rng.integers(0, 3))
    xs, ys, ks = rng.choice([-1.0, 1.0], 3)
    re = 1.5 + rng.uniform(0.0, 1.0, m)
    # K has diagonal -Im(w_j)
    im = -ks * (1.5 + rng.uniform(0.0, 1.0, m))
    dx = xs * rng.uniform(0.05, 0.2, m)
    dy = ys * rng.uniform(0.2, 1.0, m)
    if mode == 0:
        dw = 1j * dy
    elif mode == 1:
        dw = dx + 0j
    else:
        dw = dx + 1j * dy
    return LinearBetaFamily(s * (re + 1j * im), s * dw, zeta, s, name=f"random-beta(seed={seed})")


class LinearMatrixFamily(MatrixFamily):
    """A(t) = A0 + t A1."""

    def __init__(self, A0, A1, name: str = "linear-matrix"):
        self.A0 = nm.as_matrix(A0)
        self.A1 = nm.as_matrix(A1)
        if self.A0.shape != self.A1.shape:
            raise FamilyError("A0 and A1 must have the same shape")
        super().__init__(lambda t: self.A0 + float(t) * self.A1, name=name)


def constant_matrix_family(A0) -> LinearMatrixFamily:
    A0 = nm.as_matrix(A0)
    return LinearMatrixFamily(A0, np.zeros_like(A0), name="constant-matrix")


def schur_path_family(func: Callable[[float], SchurParameters], zeta=None) -> ParameterPathFamily:
    return ParameterPathFamily(func, zeta)


# -- tabulated -------------------------------------------------------------


class _Grid:
    def __init__(self, ts: Sequence[float], rows: Sequence, tol: float = 0.0):
        self.ts = np.asarray(ts, dtype=float)
        self.rows = list(rows)
        self.tol = tol

    def lookup(self, t: float, name: str):
        t = float(t)
        k = int(np.searchsorted(self.ts, t))
        for c in (k - 1, k):
            if 0 <= c < self.ts.size and abs(self.ts[c] - t) <= self.tol * max(1.0, abs(t)):
                return self.rows[c]
        raise FamilyError(f"{name}: t={t!r} is not on the tabulated grid (no interpolation)")

    def stencil(self, t: float):
        """Neighbouring grid points (one-sided at the ends)."""
        k = int(np.argmin(np.abs(self.ts - float(t))))
        if self.ts.size < 2:
            raise FamilyError("a single tabulated row has no derivative")
        lo, hi = max(k - 1, 0), min(k + 1, self.ts.size - 1)
        return float(self.ts[lo]), float(self.ts[hi])


class TabulatedSchurFamily(ParameterPathFamily):
    """Schur parameters known on an exact grid only."""

    tabulated = True

    def __init__(self, ts, params: Sequence[SchurParameters], zeta=None, name="tabulated-schur"):
        self.grid = _Grid(ts, params)
        super().__init__(lambda t: self.grid.lookup(t, name), zeta, name)

    def stencil(self, t, h):
        return self.grid.stencil(t)


class TabulatedMatrixFamily(MatrixFamily):
    """Dissipative matrices known on an exact grid only."""

    tabulated = True

    def __init__(self, ts, matrices: Sequence[np.ndarray], name="tabulated-matrix"):
        self.grid = _Grid(ts, matrices)
        super().__init__(lambda t: self.grid.lookup(t, name), name)

    def stencil(self, t, h):
        return self.grid.stencil(t)


def tabulated_family(source):
    """Read a tabulated family (path or text); see :mod:`popuc.formats`."""
    from .formats import read_table

    return read_table(source)
