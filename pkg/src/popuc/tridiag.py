"""Tridiagonal machinery attached to a Schur parameter array and a point zeta.

Given zeta on the circle away from the spectrum of G, the pseudoreflection
coefficients tau_j(zeta) lead to numbers beta_0..beta_n for which the
recurrence

    p_{j+1} = (beta_j + conj(beta_j) z) p_j - z p_{j-1},   p_{-1} = 0, p_0 = 1

ends in a polynomial with the same zeros as det(zI - G).  The lower
bidiagonal matrix ``A = sqrt(zeta) * bidiag(conj(beta_j); -1)`` has positive
definite Hermitian part and its generalized Cayley transform ``A^{-1} A^*``
carries the zeros as ``-conj(zeta) * eta``.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import numerics as nm
from .errors import ConstructionFault, ConvergenceError, ParameterError, SpectrumCollisionError
from .schur import (
    SchurParameters,
    TWO_PI,
    angle_set,
    build_hessenberg,
    circular_gaps,
    hessenberg_det,
    normalize_angle,
    popuc_eval,
)

log = logging.getLogger(__name__)

LITERAL = "literal-formula"
MATCHED = "recurrence-matched"
DIRECT = "direct"

# sample points for fitting the three-term relation; none lies on the circle
_FIT_POINTS = (0.5, 0.5j * 1.1, -0.35 - 0.3j)
_CHECK_POINT = 1.7 + 0.4j


@dataclass(frozen=True)
class PseudoReflections:
    zeta: complex
    values: np.ndarray  # values[j] = tau_j(zeta), j = 0..n

    def tau(self, j: int) -> complex:
        return complex(self.values[j])


@dataclass(frozen=True)
class BetaSequence:
    zeta: complex
    zeta_sqrt: complex
    values: np.ndarray
    provenance: str = MATCHED

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "zeta", complex(self.zeta))
        object.__setattr__(self, "zeta_sqrt", complex(self.zeta_sqrt))
        if np.any(np.abs(v) <= 1e-14):
            j = int(np.nonzero(np.abs(v) <= 1e-14)[0][0])
            raise ParameterError(f"beta_{j} vanishes", index=j)
        if abs(self.zeta_sqrt ** 2 - self.zeta) > 1e-12 * max(1.0, abs(self.zeta)):
            raise ParameterError("zeta_sqrt is not a square root of zeta")

    @property
    def order(self) -> int:
        return len(self.values)

    @property
    def normalized(self) -> np.ndarray:
        """conj(sqrt(zeta)) * beta_j, i.e. zeta^{-1/2} beta_j for |zeta| = 1."""
        return self.values / self.zeta_sqrt


@dataclass(frozen=True)
class DissipativeSystem:
    beta: BetaSequence
    A: np.ndarray
    H: np.ndarray
    K: np.ndarray

    @property
    def zeta(self) -> complex:
        return self.beta.zeta

    @property
    def order(self) -> int:
        return self.A.shape[0]


def principal_sqrt(zeta: complex) -> complex:
    return cmath.sqrt(complex(zeta))


def pseudo_reflections(params: SchurParameters, zeta: complex, check_spectrum: bool = True) -> PseudoReflections:
    """tau_n(zeta) = tau_n, then the backward Moebius recursion down to tau_0(zeta)."""
    zeta = complex(zeta)
    if abs(abs(zeta) - 1.0) > 1e-12:
        raise ParameterError(f"zeta = {zeta} is not on the unit circle")
    if check_spectrum:
        if abs(popuc_eval(params, zeta)) <= 1e-10:
            raise SpectrumCollisionError("zeta must avoid spectrum")
    n = params.n
    vals = np.empty(n + 1, dtype=complex)
    vals[n] = params.tau
    zc = zeta.conjugate()
    for j in range(n - 1, -1, -1):
        a = complex(params.alphas[j])
        num = zc * a + vals[j + 1]
        den = a.conjugate() * vals[j + 1] + zc
        if abs(den) < 1e-14:
            log.error("pseudoreflection denominator vanished at j=%d", j)
            raise ConvergenceError(f"vanishing denominator in tau_{j}(zeta)")
        vals[j] = num / den
    return PseudoReflections(zeta, vals)


def beta_literal(params: SchurParameters, refl: PseudoReflections, zeta_sqrt: complex | None = None) -> BetaSequence:
    """The beta recursion exactly as displayed, with alpha_{n+1} := 0.

    ``conj(tau_j)`` in the last factor is taken as conj(tau_j(zeta)).
    """
    zeta = refl.zeta
    s = principal_sqrt(zeta) if zeta_sqrt is None else complex(zeta_sqrt)
    n = params.n
    ext = np.concatenate([params.alphas, [0.0, 0.0]])  # alpha_n, alpha_{n+1} := 0
    tau = refl.values
    den0 = s + tau[0] * s
    if abs(den0) < 1e-14:
        raise ParameterError("beta_0 denominator vanishes (tau_0(zeta) = -1)", index=0)
    vals = [1.0 / den0]
    for j in range(1, n + 1):
        f1 = zeta.conjugate() + tau[j] * ext[j - 1].conjugate()
        f2 = 1.0 - tau[j].conjugate() * ext[j + 1]
        if abs(f1) < 1e-14:
            raise ParameterError(f"beta_{j}: factor conj(zeta) + tau_j conj(alpha_{{j-1}}) vanishes", index=j)
        if abs(f2) < 1e-14:
            raise ParameterError(f"beta_{j}: factor 1 - conj(tau_j) alpha_{{j+1}} vanishes", index=j)
        vals.append(1.0 / vals[-1] / f1 / f2)
    return BetaSequence(zeta, s, np.array(vals), LITERAL)


def nested_charpolys(params: SchurParameters, refl: PseudoReflections, z) -> np.ndarray:
    """P_0(z)..P_{n+1}(z) with P_{j+1} = det(zI - G(alpha_0..alpha_{j-1}, tau_j(zeta))).

    ``z`` may be a sequence of points; then rows are points.
    """
    pts = np.atleast_1d(np.asarray(z, dtype=complex))
    n = params.n
    out = np.empty((pts.size, n + 2), dtype=complex)
    out[:, 0] = 1.0
    out[:, 1] = pts - refl.tau(0).conjugate()
    for j in range(1, n + 1):
        Gj = build_hessenberg(SchurParameters(params.alphas[:j], refl.tau(j)), cross_check=False).matrix
        eye = np.eye(j + 1)
        for k, zk in enumerate(pts):
            out[k, j + 1] = hessenberg_det(zk * eye - Gj)
    return out if np.ndim(z) else out[0]


def recurrence_coefficients(params: SchurParameters, refl: PseudoReflections):
    """Fit P_{j+1} = (b_j + c_j z) P_j - d_j z P_{j-1} for j = 0..n.

    Returns arrays b, c, d and the worst relative misfit at a check point.
    """
    n = params.n
    pts = list(_FIT_POINTS) + [_CHECK_POINT]
    table = nested_charpolys(params, refl, pts)
    b = np.empty(n + 1, dtype=complex)
    c = np.empty(n + 1, dtype=complex)
    d = np.zeros(n + 1, dtype=complex)
    misfit = 0.0
    b[0] = -refl.tau(0).conjugate()
    c[0] = 1.0
    for j in range(1, n + 1):
        M = np.array([[table[k, j], pts[k] * table[k, j], -pts[k] * table[k, j - 1]] for k in range(3)])
        rhs = table[:3, j + 1]
        b[j], c[j], d[j] = nm.solve(M, rhs)
        z = pts[3]
        pred = (b[j] + c[j] * z) * table[3, j] - d[j] * z * table[3, j - 1]
        misfit = max(misfit, abs(pred - table[3, j + 1]) / max(1.0, abs(table[3, j + 1])))
    return b, c, d, misfit


def beta_from_charpoly(params: SchurParameters, zeta: complex, zeta_sqrt: complex | None = None,
                       sym_tol: float = 1e-8) -> BetaSequence:
    """Betas reproducing the nested characteristic polynomials up to scaling.

    The three-term relation among the P_j is fitted from sample points, then a
    diagonal rescaling p_j = kappa_j P_j with kappa_0 = 1, |kappa_1| = 1 makes
    the coefficient of p_{j-1} equal to -z and the two linear coefficients
    conjugate.  Of the two admissible signs of kappa_1 the one with
    Re(sqrt(zeta) * conj(beta_0)) > 0 is taken.
    """
    zeta = complex(zeta)
    s = principal_sqrt(zeta) if zeta_sqrt is None else complex(zeta_sqrt)
    refl = pseudo_reflections(params, zeta)
    b, c, d, misfit = recurrence_coefficients(params, refl)
    if misfit > 1e-8:
        raise ConstructionFault(f"three-term relation misfit {misfit:.2e}", detail=(b, c, d))
    n = params.n
    # kappa_1: kappa_1 b_0 = conj(kappa_1 c_0)
    ratio = c[0].conjugate() / b[0]
    k1 = cmath.sqrt(ratio / abs(ratio))
    if (s * (k1 * b[0]).conjugate()).real < 0.0:
        k1 = -k1
    kappa = np.empty(n + 2, dtype=complex)
    kappa[0], kappa[1] = 1.0, k1
    for j in range(1, n + 1):
        kappa[j + 1] = kappa[j - 1] / d[j]
    vals = np.empty(n + 1, dtype=complex)
    for j in range(n + 1):
        r = kappa[j + 1] / kappa[j]
        u, v = r * b[j], (r * c[j]).conjugate()
        if abs(u - v) > sym_tol * max(1.0, abs(u)):
            raise ConstructionFault(
                f"no rescaling makes the linear coefficients conjugate at j={j}",
                detail=(b[j], c[j], d[j]),
            )
        vals[j] = (u + v) / 2
    return BetaSequence(zeta, s, vals, MATCHED)


def assemble_system(beta: BetaSequence, check: bool = True, other: BetaSequence | None = None) -> DissipativeSystem:
    """A = sqrt(zeta) * lower bidiagonal(conj(beta_j); -1) with its H + iK split."""
    m = beta.order
    s = beta.zeta_sqrt
    A = np.diag(s * beta.values.conj()) - s * np.eye(m, k=-1)
    H = nm.hermitian_part(A)
    K = nm.skew_part(A)
    if check and not nm.cholesky(H, 1e-12 * nm.max_norm(H)).ok:
        raise ConstructionFault(
            "Hermitian part of A is not positive definite",
            detail={"beta": beta.values, "other": None if other is None else other.values},
        )
    return DissipativeSystem(beta, A, H, K)


def p_polynomials(beta: BetaSequence, z) -> np.ndarray:
    """p_0..p_{n+1} at z with p_0 = 1."""
    vals = beta.values
    m = len(vals)
    p = np.empty(m + 1, dtype=complex)
    prev, cur = 0.0, 1.0 + 0j
    p[0] = cur
    for j in range(m):
        prev, cur = cur, (vals[j] + vals[j].conjugate() * z) * cur - z * prev
        p[j + 1] = cur
    return p


def p_coefficients(beta: BetaSequence) -> np.ndarray:
    """Coefficients (ascending) of p_{n+1}."""
    prev = np.zeros(1, dtype=complex)
    cur = np.ones(1, dtype=complex)
    for bj in beta.values:
        lin = np.array([bj, bj.conjugate()])
        nxt = np.convolve(lin, cur)
        nxt[1:len(prev) + 1] -= prev
        prev, cur = cur, nxt
    return cur


def p_zeros(beta: BetaSequence) -> np.ndarray:
    return nm.poly_roots(p_coefficients(beta))


def matrix_form_residual(system: DissipativeSystem, z) -> float:
    """Relative size of (zeta A^* + z A) p - sqrt(zeta) p_{n+1} e_{n+1}."""
    z = complex(z)
    pall = p_polynomials(system.beta, z)
    p = pall[:-1]
    lhs = (system.zeta * system.A.conj().T + z * system.A) @ p
    rhs = np.zeros_like(lhs)
    rhs[-1] = system.beta.zeta_sqrt * pall[-1]
    scale = (nm.fro_norm(system.A) * (1 + abs(z)) * nm.fro_norm(p)) or 1.0
    return nm.fro_norm(lhs - rhs) / scale


def cayley_transform(A) -> np.ndarray:
    """Generalized Cayley transform A^{-1} A^*."""
    A = nm.as_matrix(A)
    return nm.solve(A, A.conj().T)


def cayley_spectrum(system: DissipativeSystem) -> np.ndarray:
    """Zeros of p_{n+1} recovered as -zeta * eig(A^{-1} A^*)."""
    U = cayley_transform(system.A)
    return -system.zeta * nm.general_eig(U).values


def _inner(x, y) -> complex:
    return complex(np.vdot(x, y))


def cot_identity_residual(system: DissipativeSystem, eta: complex) -> float:
    """|cot(arg(conj(zeta) eta)/2) - (p, Kp)/(p, Hp)| scaled by 1 + |cot|."""
    eta = complex(eta)
    mu = system.zeta.conjugate() * eta
    theta = normalize_angle(mu)
    if min(theta, TWO_PI - theta) < 1e-10:
        raise SpectrumCollisionError("eta equals zeta")
    p = p_polynomials(system.beta, eta)[:-1]
    ratio = _inner(p, system.K @ p).real / _inner(p, system.H @ p).real
    cot = 1.0 / math.tan(theta / 2)
    return abs(cot - ratio) / (1.0 + abs(cot))


def cayley_unitarity_residual(system: DissipativeSystem, factor: str = "sqrt") -> float:
    """||W^* W - I||_max for W = R B^{-1} B^* R^{-1}, B = iA, R^* R = H.

    ``factor="sqrt"`` takes R = H^{1/2}; ``factor="cholesky"`` takes the upper
    Cholesky factor, which gives the same residual in exact arithmetic and is
    much cheaper.
    """
    if factor == "sqrt":
        R = nm.hermitian_sqrt(system.H)
    elif factor == "cholesky":
        ch = nm.cholesky(system.H)
        if not ch.ok:
            raise ConstructionFault("Hermitian part is not positive definite", detail=ch.failed_pivot)
        R = ch.factor.conj().T
    else:
        raise ValueError(f"unknown factor {factor!r}")
    B = 1j * system.A
    W = R @ nm.solve(B, B.conj().T) @ nm.inverse(R)
    return nm.max_norm(W.conj().T @ W - np.eye(system.order))


def default_zeta(params_or_spectrum) -> complex:
    """Midpoint of the largest circular gap of the spectrum.

    Ties (within 1e-12) go to the midpoint with the smallest argument in (0, 2*pi].
    """
    if isinstance(params_or_spectrum, SchurParameters):
        spec = nm.general_eig(build_hessenberg(params_or_spectrum).matrix).values
    else:
        spec = np.asarray(params_or_spectrum, dtype=complex)
    ang = np.sort(normalize_angle(spec))
    gaps = circular_gaps(ang)
    big = gaps.max()
    mids = []
    for k in np.nonzero(gaps >= big - 1e-12)[0]:
        mid = ang[k] + gaps[k] / 2
        mids.append(normalize_angle(cmath.exp(1j * mid)))
    return cmath.exp(1j * min(mids))


def spectrum_distance(zeta: complex, spectrum) -> float:
    return float(np.min(np.abs(np.asarray(spectrum) - zeta)))


def system_for(params: SchurParameters, zeta: complex | None = None, zeta_sqrt: complex | None = None) -> DissipativeSystem:
    """Convenience: default zeta, matched betas, assembled system."""
    if zeta is None:
        zeta = default_zeta(params)
    beta = beta_from_charpoly(params, zeta, zeta_sqrt)
    try:
        return assemble_system(beta)
    except ConstructionFault:
        literal = beta_literal(params, pseudo_reflections(params, zeta), beta.zeta_sqrt)
        return assemble_system(beta, other=literal)


def zero_angle_set(system: DissipativeSystem):
    return angle_set(cayley_spectrum(system))


def compare_beta_routes(params: SchurParameters, zeta: complex) -> dict:
    """Zero sets of p_{n+1} from both beta routes against spec(G)."""
    from .matching import circular_match_error

    spec = nm.general_eig(build_hessenberg(params).matrix).values
    out = {}
    matched = beta_from_charpoly(params, zeta)
    out[MATCHED] = circular_match_error(p_zeros(matched), spec)
    try:
        lit = beta_literal(params, pseudo_reflections(params, zeta))
        out[LITERAL] = circular_match_error(p_zeros(lit), spec)
    except (ParameterError, ConvergenceError) as exc:
        out[LITERAL] = f"failed: {exc}"
    if not isinstance(out[LITERAL], str) and out[LITERAL] > 1e-8:
        log.info("literal beta formula misses spec(G) by %.3e", out[LITERAL])
    return out
