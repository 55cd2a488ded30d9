"""Motion of eigenvalues on the unit circle along one-parameter families.

Two kinds of family are handled:

* ``"schur"`` families give, for each t, a beta sequence at a fixed zeta (either
  directly or through Schur parameters), hence a dissipative system
  ``A(t) = sqrt(zeta) bidiag(conj(beta_j); -1)`` whose zeros are those of
  ``p_{n+1}``.
* ``"matrix"`` families give a strictly dissipative ``A(t)`` and the
  eigenvalues of ``A(t)^{-1} A(t)^*``.

The sign rules predict counterclockwise/clockwise motion from definiteness of
H, K and their t-derivatives; the tracker measures the motion independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import numerics as nm
from .errors import FamilyError, ParameterError, SpectrumCollisionError, TrackingError
from .matching import optimal_assignment
from .schur import SchurParameters, TWO_PI, build_hessenberg, circular_gaps, normalize_angle, wrap_pi
from .tridiag import (
    BetaSequence,
    DissipativeSystem,
    assemble_system,
    beta_from_charpoly,
    cayley_spectrum,
    cayley_transform,
    default_zeta,
    p_polynomials,
    principal_sqrt,
)

CCW = "counterclockwise"
CW = "clockwise"
UNCLASSIFIED = "unclassified"

_SIGN = {nm.POSITIVE: "+", nm.NEGATIVE: "-", nm.INDEFINITE: "0"}


def default_step(t: float) -> float:
    return 1e-5 * max(1.0, abs(t))


# -- families --------------------------------------------------------------


class ParameterFamily:
    kind: str = ""
    name: str = "family"
    tabulated: bool = False  # exact grid only: no bisection between grid points

    def spectrum(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def parts(self, t: float):
        """(H, K) of the dissipative matrix at t."""
        raise NotImplementedError

    def stencil(self, t: float, h: float):
        """Points used for the central difference at t."""
        return t - h, t + h


class MatrixFamily(ParameterFamily):
    """t -> strictly dissipative matrix A(t)."""

    kind = "matrix"

    def __init__(self, func: Callable[[float], np.ndarray], name: str = "matrix"):
        self._func = func
        self.name = name

    def matrix(self, t: float) -> np.ndarray:
        try:
            return nm.as_matrix(self._func(t))
        except FamilyError:
            raise
        except (ValueError, ArithmeticError) as exc:
            raise FamilyError(f"{self.name}: cannot evaluate at t={t}: {exc}") from exc

    def parts(self, t):
        A = self.matrix(t)
        return nm.hermitian_part(A), nm.skew_part(A)

    def spectrum(self, t):
        return nm.general_eig(cayley_transform(self.matrix(t))).values


class SchurFamily(ParameterFamily):
    """Families producing beta sequences at a fixed zeta.

    Subclasses implement :meth:`beta`; ``zeta`` may be fixed at construction or
    chosen for a sweep with :meth:`with_zeta`.
    """

    kind = "schur"

    def __init__(self, zeta: Optional[complex] = None, zeta_sqrt: Optional[complex] = None, name: str = "schur"):
        self.zeta = None if zeta is None else complex(zeta)
        self.zeta_sqrt = zeta_sqrt if zeta_sqrt is not None else (None if zeta is None else principal_sqrt(zeta))
        self.name = name

    def beta(self, t: float, zeta: Optional[complex] = None) -> BetaSequence:
        raise NotImplementedError

    def require_zeta(self, zeta=None) -> complex:
        z = self.zeta if zeta is None else complex(zeta)
        if z is None:
            raise FamilyError(f"{self.name}: no zeta chosen for this family")
        return z

    def system(self, t: float, zeta: Optional[complex] = None) -> DissipativeSystem:
        return assemble_system(self.beta(t, zeta))

    def parts(self, t, zeta=None):
        s = self.system(t, zeta)
        return s.H, s.K

    def spectrum(self, t, zeta=None):
        return cayley_spectrum(self.system(t, zeta))

    def choose_zeta(self, t: float) -> complex:
        return self.require_zeta()

    def with_zeta(self, zeta: complex, zeta_sqrt: Optional[complex] = None):
        self.zeta = complex(zeta)
        self.zeta_sqrt = principal_sqrt(zeta) if zeta_sqrt is None else complex(zeta_sqrt)
        return self


class ParameterPathFamily(SchurFamily):
    """t -> SchurParameters; betas come from the fitted recurrence at fixed zeta."""

    def __init__(self, func: Callable[[float], SchurParameters], zeta=None, name="schur-path"):
        super().__init__(zeta, name=name)
        self._func = func

    def params(self, t: float) -> SchurParameters:
        try:
            return self._func(t)
        except FamilyError:
            raise
        except (ValueError, ArithmeticError) as exc:
            raise FamilyError(f"{self.name}: cannot evaluate at t={t}: {exc}") from exc

    def beta(self, t, zeta=None):
        z = self.require_zeta(zeta)
        s = self.zeta_sqrt if zeta is None else principal_sqrt(z)
        try:
            return beta_from_charpoly(self.params(t), z, s)
        except SpectrumCollisionError as exc:
            raise SpectrumCollisionError(
                f"zeta={z:.6g} collides with the spectrum at t={t}; choose a new zeta"
            ) from exc

    def spectrum(self, t, zeta=None):
        return nm.general_eig(build_hessenberg(self.params(t)).matrix).values

    def choose_zeta(self, t):
        return default_zeta(self.params(t))


# -- derivatives -----------------------------------------------------------


@dataclass(frozen=True)
class DerivativePair:
    dH: np.ndarray
    dK: np.ndarray
    t: float
    step: float
    dR: Optional[np.ndarray] = None


def _parts(family, t, zeta):
    if family.kind == "schur":
        return family.parts(t, zeta)
    return family.parts(t)


def derivatives(family: ParameterFamily, t: float, h: Optional[float] = None,
                zeta: Optional[complex] = None, with_sqrt: bool = False) -> DerivativePair:
    """Central differences of H and K (and optionally of H^{1/2})."""
    h = default_step(t) if h is None else float(h)
    if not h > 0:
        raise ValueError("step h must be positive")
    lo, hi = family.stencil(t, h)
    Hp, Kp = _parts(family, hi, zeta)
    Hm, Km = _parts(family, lo, zeta)
    w = hi - lo
    dH = nm.hermitian_part((Hp - Hm) / w)
    dK = nm.hermitian_part((Kp - Km) / w)
    dR = None
    if with_sqrt:
        dR = nm.hermitian_part((nm.hermitian_sqrt(Hp) - nm.hermitian_sqrt(Hm)) / w)
    return DerivativePair(dH, dK, float(t), w / 2, dR)


def _fd_tol(X: np.ndarray) -> float:
    # finite-difference noise floor for verdicts on derivative matrices
    return 1e-8 * max(1.0, nm.max_norm(X))


# -- point classification --------------------------------------------------


@dataclass(frozen=True)
class PointClassification:
    t: float
    rule: str
    label: str
    predicted: Optional[str]
    verdicts: dict = field(default_factory=dict)
    memberships: tuple = ()

    @property
    def prediction(self) -> str:
        return self.predicted or UNCLASSIFIED


def _matrix_prediction(dh: str, dk: str, hs: str) -> Optional[str]:
    if dh == "+" and ((dk == "+" and hs == "-") or (dk == "-" and hs == "+")):
        return CCW
    if dh == "-" and ((dk == "-" and hs == "-") or (dk == "+" and hs == "+")):
        return CW
    return None


def classify_matrix_point(family: MatrixFamily, t: float, h: Optional[float] = None) -> PointClassification:
    """Sign rule for S(t) = eig(A^{-1} A^*) from signs of H, dH/dt and dK/dt."""
    if family.kind != "matrix":
        raise FamilyError("matrix-family required")
    H, K = family.parts(t)
    d = derivatives(family, t, h)
    hs = _SIGN[nm.definiteness(H)]
    ks = _SIGN[nm.definiteness(K)]
    dh = _SIGN[nm.definiteness(d.dH, atol=_fd_tol(H))]
    dk = _SIGN[nm.definiteness(d.dK, atol=_fd_tol(K))]
    verdicts = {"H": hs, "K": ks, "dH": dh, "dK": dk}
    label = f"I{dh}{dk}&H{hs}"
    memberships = tuple(m for m in (f"I{dh}{dk}" if "0" not in dh + dk else "", f"H{hs}" if hs != "0" else "") if m)
    if ks != "+" and hs != "+":
        return PointClassification(float(t), "dissipative", label + "&nd", None, verdicts, memberships)
    pred = _matrix_prediction(dh, dk, hs)
    return PointClassification(float(t), "dissipative", label, pred, verdicts, memberships)


def _vector_sign(v: np.ndarray, tol: float) -> str:
    if np.all(np.abs(v) <= tol):
        return "0"
    if np.all(v > tol):
        return "+"
    if np.all(v < -tol):
        return "-"
    return "~"


def beta_rates(family: SchurFamily, t: float, h: Optional[float] = None, zeta=None):
    """x_j, y_j: t-derivatives of Re and Im of conj(sqrt(zeta)) beta_j."""
    h = default_step(t) if h is None else float(h)
    lo, hi = family.stencil(t, h)
    bp = family.beta(hi, zeta).normalized
    bm = family.beta(lo, zeta).normalized
    rate = (bp - bm) / (hi - lo)
    return rate.real, rate.imag


def _beta_prediction(xs: str, ys: str, ks: str):
    if xs == "0" and ys == "0":
        return "constant", None
    if xs == "0":
        return "fixed-H", {"+": CCW, "-": CW}.get(ys)
    if ys == "0":
        if xs == "+" and ks == "+":
            return "fixed-K", CCW
        if xs == "-" and ks == "-":
            return "fixed-K", CW
        return "fixed-K", None
    table = {("+", "+", "+"): CCW, ("-", "+", "-"): CCW, ("-", "-", "+"): CW, ("+", "-", "-"): CW}
    return "beta", table.get((xs, ys, ks))


def classify_beta_point(family: SchurFamily, t: float, zeta: Optional[complex] = None,
                        h: Optional[float] = None) -> PointClassification:
    """Sign rule for the zeros of p_{n+1} from the rates of zeta^{-1/2} beta_j."""
    if family.kind != "schur":
        raise FamilyError("schur-family required")
    base = family.beta(t, zeta)
    x, y = beta_rates(family, t, h, zeta)
    tol = 1e-8 * max(1.0, float(np.max(np.abs(base.values))))
    xs, ys = _vector_sign(x, tol), _vector_sign(y, tol)
    sysm = assemble_system(base)
    ks = _SIGN[nm.definiteness(sysm.K)]
    rule, pred = _beta_prediction(xs, ys, ks)
    if rule == "fixed-H":
        label = f"I0{ys}"
    elif rule == "constant":
        label = "I00"
    else:
        label = f"I{xs}{ys}&K{ks}"
    memberships = (label,) if "~" not in label and not label.endswith("K0") else ()
    verdicts = {"x": xs, "y": ys, "K": ks, "H": "+"}
    return PointClassification(float(t), rule, label, pred, verdicts, memberships)


def classify_point(family: ParameterFamily, t: float, zeta=None, h=None) -> PointClassification:
    if family.kind == "matrix":
        return classify_matrix_point(family, t, h)
    return classify_beta_point(family, t, zeta, h)


# -- certificates ----------------------------------------------------------


def certificate_matrix(system: DissipativeSystem, derivs: DerivativePair, transpose: bool = False) -> np.ndarray:
    """dK/dt - (L + L^*) with L = (dR/dt) R^{-1} K and R = H^{1/2}.

    With ``transpose=True`` the plain transpose L^T is used instead of L^*.
    """
    if derivs.dR is None:
        raise ValueError("derivative pair lacks dR; compute with with_sqrt=True")
    R = nm.hermitian_sqrt(system.H)
    L = derivs.dR @ nm.solve(R, system.K)
    Lt = L.T if transpose else L.conj().T
    return derivs.dK - (L + Lt)


def motion_certificate(system: DissipativeSystem, derivs: DerivativePair, eta: complex,
                       transpose: bool = False) -> float:
    """Quadratic form whose sign gives the direction of eta: negative means counterclockwise."""
    p = p_polynomials(system.beta, complex(eta))[:-1]
    C = certificate_matrix(system, derivs, transpose)
    return float(np.vdot(p, C @ p).real)


def lyapunov_sufficient(derivs: DerivativePair, system: DissipativeSystem):
    """Definiteness of (L + L^*) - dK/dt and the direction it certifies for all zeros."""
    C = -certificate_matrix(system, derivs)
    verdict = nm.definiteness(C, atol=_fd_tol(system.K))
    pred = {nm.POSITIVE: CCW, nm.NEGATIVE: CW}.get(verdict)
    return verdict, pred


def _sorted_zeros(family: SchurFamily, t, zeta):
    z = family.spectrum(t, zeta) if family.kind == "schur" else family.spectrum(t)
    ang = normalize_angle(z)
    order = np.argsort(ang)
    return np.asarray(z)[order], np.asarray(ang)[order]


def derivative_identity_terms(family: SchurFamily, t: float, eta_id: int, zeta=None, h=None):
    """Both sides of the derivative identity for the zero with index ``eta_id``.

    Left: (q, M' q) with M = H^{-1/2} K H^{-1/2}, q = H^{1/2} p, M' by central
    differences.  Right: (p, Hp) / (cos(arg(conj(zeta) eta)) - 1) * d arg(eta)/dt
    with the angle rate from the tracked zero.
    """
    if family.kind != "schur":
        raise FamilyError("schur-family required")
    zeta_v = family.require_zeta(zeta)
    h = default_step(t) if h is None else float(h)
    sysm = family.system(t, zeta)
    zeros, ang = _sorted_zeros(family, t, zeta)
    eta = zeros[eta_id]
    theta = normalize_angle(zeta_v.conjugate() * eta)
    if min(theta, TWO_PI - theta) < 1e-6:
        raise SpectrumCollisionError("eta too close to zeta")

    def M_of(tt):
        Ht, Kt = family.parts(tt, zeta)
        Ri = nm.inverse(nm.hermitian_sqrt(Ht))
        return Ri @ Kt @ Ri

    lo, hi = family.stencil(t, h)
    dM = (M_of(hi) - M_of(lo)) / (hi - lo)
    R = nm.hermitian_sqrt(sysm.H)
    p = p_polynomials(sysm.beta, eta)[:-1]
    q = R @ p
    lhs = float(np.vdot(q, dM @ q).real)

    rates = []
    for tt in (hi, lo):
        zz, aa = _sorted_zeros(family, tt, zeta)
        k = int(np.argmin(np.abs(zz - eta)))
        rates.append(aa[k])
    dtheta = wrap_pi(rates[0] - rates[1]) / (hi - lo)
    php = float(np.vdot(p, sysm.H @ p).real)
    rhs = php / (math.cos(theta) - 1.0) * dtheta
    return lhs, rhs


def derivative_identity_residual(family: SchurFamily, t: float, eta_id: int, zeta=None, h=None) -> float:
    lhs, rhs = derivative_identity_terms(family, t, eta_id, zeta, h)
    big = max(abs(lhs), abs(rhs))
    if big <= 1e-12:
        return abs(lhs - rhs)
    return abs(lhs - rhs) / big


# -- tracking --------------------------------------------------------------


@dataclass(frozen=True)
class EigenPath:
    t: np.ndarray
    angles: np.ndarray  # unwrapped, rows = ids, columns = t
    methods: tuple

    @property
    def wrapped(self) -> np.ndarray:
        a = np.mod(self.angles, TWO_PI)
        return np.where(a <= 0.0, a + TWO_PI, a)

    def steps(self) -> np.ndarray:
        return np.diff(self.angles, axis=1)

    def direction(self, lo: int, hi: int, tol: float = 0.0) -> str:
        """Observed direction over grid columns lo..hi (inclusive)."""
        if hi <= lo:
            return "n/a"
        d = np.diff(self.angles[:, lo:hi + 1], axis=1)
        if np.all(d > tol):
            return CCW
        if np.all(d < -tol):
            return CW
        if np.all(np.abs(d) <= 1e-12):
            return "constant"
        return "mixed"


def _family_spectrum(family, t, zeta):
    z = family.spectrum(t, zeta) if family.kind == "schur" else family.spectrum(t)
    return normalize_angle(np.asarray(z))


def _assign(prev: np.ndarray, cur: np.ndarray):
    cost = np.abs(wrap_pi(cur[None, :] - prev[:, None]))
    perm = optimal_assignment(cost)
    disp = wrap_pi(cur[perm] - prev)
    return perm, disp


def track_eigenangles(family: ParameterFamily, grid: Sequence[float], zeta=None, max_refine: int = 4) -> EigenPath:
    """Continuous lifts of the eigenvalue arguments along the grid.

    Consecutive points are matched by the assignment minimizing total circular
    displacement; a step moving any angle by pi/2 or more, or by more than half
    the smallest gap, is bisected (at most ``max_refine`` levels).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-D sequence")
    if family.tabulated:
        max_refine = 0
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    cur = np.sort(_family_spectrum(family, grid[0], zeta))
    m = cur.size
    out = np.empty((m, grid.size))
    out[:, 0] = cur
    lifted = cur.copy()
    wrapped = cur.copy()
    methods = []

    def advance(t0, t1, w0, depth):
        w1 = np.asarray(_family_spectrum(family, t1, zeta))
        if w1.size != m:
            raise TrackingError(f"eigenvalue count changed at t={t1}", t=t1)
        perm, disp = _assign(w0, w1)
        w1 = w1[perm]
        gap = min(circular_gaps(w0).min(), circular_gaps(w1).min()) if m > 1 else math.inf
        big = np.max(np.abs(disp))
        if big >= math.pi / 2 or (m > 1 and big > gap / 2):
            if depth >= max_refine:
                if big >= math.pi / 2:
                    raise TrackingError(
                        f"step [{t0}, {t1}] moves an angle by {big:.3f} >= pi/2 after {max_refine} refinements",
                        t=t1,
                    )
                if gap < 1e-10:
                    ids = np.argsort(np.abs(wrap_pi(w1[:, None] - w1[None, :])) + np.eye(m) * 9, axis=None)[0]
                    raise TrackingError(
                        f"eigenvalues {divmod(int(ids), m)} collide near t={t1}", pair=divmod(int(ids), m), t=t1
                    )
                return disp, w1, depth
            tm = 0.5 * (t0 + t1)
            d1, wm, r1 = advance(t0, tm, w0, depth + 1)
            d2, w1b, r2 = advance(tm, t1, wm, depth + 1)
            return d1 + d2, w1b, max(r1, r2)
        return disp, w1, depth

    for k in range(1, grid.size):
        disp, wrapped, depth = advance(grid[k - 1], grid[k], wrapped, 0)
        lifted = lifted + disp
        out[:, k] = lifted
        methods.append("assignment" if depth == 0 else f"assignment+refine{depth}")
    return EigenPath(grid.copy(), out, tuple(methods))


# -- interval scans --------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    label: str
    predicted: Optional[str]
    observed: str
    first: int
    last: int

    @property
    def agrees(self) -> Optional[bool]:
        if self.predicted is None or self.observed == "n/a":
            return None
        return self.predicted == self.observed


@dataclass
class ClassificationReport:
    grid: np.ndarray
    points: list
    intervals: list
    path: Optional[EigenPath]
    zeta: Optional[complex] = None
    notes: list = field(default_factory=list)

    def boundaries(self) -> list:
        return [iv.start for iv in self.intervals[1:]]

    def observed_at(self, k: int) -> str:
        if self.path is None or self.grid.size < 2:
            return "n/a"
        lo, hi = (k, k + 1) if k + 1 < self.grid.size else (k - 1, k)
        return self.path.direction(lo, hi)


def _key(pc: PointClassification):
    return pc.label, pc.predicted


def _refine(classify, left: float, right: float, key_left, tol: float) -> float:
    while right - left > tol:
        mid = 0.5 * (left + right)
        if _key(classify(mid)) == key_left:
            left = mid
        else:
            right = mid
    return 0.5 * (left + right)


def scan_intervals(family: ParameterFamily, grid: Sequence[float], classifier: str = "auto",
                   refine_tol: float = 1e-6, track: bool = True, h: Optional[float] = None) -> ClassificationReport:
    """Classify every grid point, merge constant runs, refine their boundaries.

    Each predicted run is annotated with the direction actually observed on the
    tracked angles.
    """
    grid = np.asarray(grid, dtype=float)
    if classifier == "auto":
        classifier = "matrix" if family.kind == "matrix" else "beta"
    if classifier == "matrix" and family.kind != "matrix":
        raise FamilyError("matrix classifier needs a matrix family")
    if classifier == "beta" and family.kind != "schur":
        raise FamilyError("beta classifier needs a schur family")
    notes = []
    zeta = None
    if family.kind == "schur":
        zeta = _sweep_zeta(family, grid, notes)

    def classify(tt):
        return classify_point(family, tt, None, h)

    points = [classify(t) for t in grid]
    path = track_eigenangles(family, grid) if track and grid.size > 1 else None
    runs = []
    start = 0
    for k in range(1, grid.size + 1):
        if k == grid.size or _key(points[k]) != _key(points[start]):
            runs.append((start, k - 1))
            start = k
    bounds = [float(grid[0])]
    for (a, b), (c, _) in zip(runs, runs[1:]):
        if family.tabulated:
            bounds.append(0.5 * (float(grid[b]) + float(grid[c])))
        else:
            bounds.append(_refine(classify, float(grid[b]), float(grid[c]), _key(points[b]), refine_tol))
    bounds.append(float(grid[-1]))
    intervals = []
    for i, (a, b) in enumerate(runs):
        obs = path.direction(a, b) if path is not None else "n/a"
        intervals.append(Interval(bounds[i], bounds[i + 1], points[a].label, points[a].predicted, obs, a, b))
    return ClassificationReport(grid, points, intervals, path, zeta, notes)


def _sweep_zeta(family: SchurFamily, grid: np.ndarray, notes: list, min_distance: float = 1e-6) -> complex:
    """Fix zeta for the sweep: keep the family's own, else the midpoint choice."""
    if family.zeta is None:
        mid = float(grid[grid.size // 2])
        family.with_zeta(family.choose_zeta(mid))
        notes.append(f"zeta chosen at t={mid:.9g}: {family.zeta:.9g}")
    for t in grid:
        spec = family.spectrum(t)
        if float(np.min(np.abs(spec - family.zeta))) < min_distance:
            new = family.choose_zeta(float(t))
            notes.append(f"zeta collided with spectrum at t={t:.9g}; re-chosen as {new:.9g}")
            family.with_zeta(new)
    return family.zeta
