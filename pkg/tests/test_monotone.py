import cmath
import math

import numpy as np
import pytest

from popuc import numerics as nm
from popuc.errors import FamilyError, TrackingError
from popuc.families import (
    HypergeometricFamily,
    LinearBetaFamily,
    LinearMatrixFamily,
    constant_beta_family,
    constant_matrix_family,
    random_beta_family,
    table1_family,
    tabulated_family,
)
from popuc.formats import emit_table
from popuc.monotone import (
    CCW,
    CW,
    UNCLASSIFIED,
    beta_rates,
    certificate_matrix,
    classify_beta_point,
    classify_matrix_point,
    classify_point,
    derivative_identity_residual,
    derivatives,
    lyapunov_sufficient,
    motion_certificate,
    scan_intervals,
    track_eigenangles,
)
from popuc.reference import TABLE1
from popuc.schur import normalize_angle

from conftest import multiset_error

SQRT3 = math.sqrt(3)


def scalar_family():
    # A(t) = 1 + it
    return LinearMatrixFamily([[1.0]], [[1j]], name="scalar")


# -- derivatives -----------------------------------------------------------


@pytest.mark.parametrize("t", [-9.0, -1.0, 0.5, 4.0, 17.0])
def test_table1_derivatives(t):
    fam = table1_family(5)
    d = derivatives(fam, t, h=1e-5)
    assert nm.max_norm(d.dH - np.eye(5)) <= 1e-8
    exact = np.diag([-math.sin(t) / k for k in range(1, 6)])
    assert nm.max_norm(d.dK - exact) <= 1e-8
    assert nm.max_norm(d.dK - fam.dK_exact(t)) <= 1e-8


def test_constant_family_derivatives_vanish():
    fam = constant_matrix_family(np.array([[2 + 1j, 0.3], [0.1, 1 + 2j]]))
    d = derivatives(fam, 1.0)
    assert nm.max_norm(d.dH) == 0 and nm.max_norm(d.dK) == 0


def test_derivatives_reject_bad_step():
    with pytest.raises(ValueError):
        derivatives(table1_family(3), 0.0, h=0.0)


# -- matrix classifier -----------------------------------------------------


def test_classify_table1_minus_nine():
    pc = classify_matrix_point(table1_family(5), -9.0)
    assert pc.verdicts["dH"] == "+" and pc.verdicts["dK"] == "+" and pc.verdicts["H"] == "-"
    assert pc.label == "I++&H-"
    assert pc.prediction == CCW


def test_classify_table1_three():
    pc = classify_matrix_point(table1_family(5), 3.0)
    assert pc.label == "I+-&H+"
    assert pc.prediction == CCW


def test_classify_table1_minus_five_unclassified():
    pc = classify_matrix_point(table1_family(5), -5.0)
    assert pc.label == "I+-&H-"
    assert pc.predicted is None and pc.prediction == UNCLASSIFIED


@pytest.mark.parametrize("row", TABLE1, ids=lambda r: f"t={r[1]}")
def test_classifier_matches_table_labels(row):
    label, t, _ = row
    pc = classify_matrix_point(table1_family(5), t)
    if label is None:
        assert pc.predicted is None
    else:
        assert pc.label == label and pc.prediction == CCW


def test_matrix_classifier_requires_matrix_family():
    with pytest.raises(FamilyError, match="matrix-family required"):
        classify_matrix_point(HypergeometricFamily(1.0, 2), 0.0)


@pytest.mark.parametrize("h", [1e-4, 1e-5, 1e-6])
def test_verdicts_stable_under_step(h):
    fam = table1_family(5)
    for t in np.arange(-10, 20, 0.7):
        near = min(abs(t - b) for b in (-SQRT3, SQRT3) + tuple(k * math.pi for k in range(-3, 7)))
        if near < 1e-3:
            continue
        ref = classify_matrix_point(fam, t)
        assert classify_matrix_point(fam, t, h=h).label == ref.label


# -- beta classifier -------------------------------------------------------


def test_hypergeometric_point_is_fixed_H_clockwise():
    fam = HypergeometricFamily(1.0, 4)
    x, y = beta_rates(fam, 2.0)
    assert np.max(np.abs(x)) <= 1e-9
    assert np.allclose(y, -fam.lambdas, atol=1e-8)
    pc = classify_beta_point(fam, 2.0)
    assert pc.rule == "fixed-H" and pc.label == "I0-"
    assert pc.prediction == CW


def test_constant_beta_family_unclassified():
    pc = classify_beta_point(constant_beta_family([2 + 1j, 3 - 1j, 2.0 + 0.5j]), 0.3)
    assert pc.rule == "constant" and pc.prediction == UNCLASSIFIED
    assert pc.memberships == ("I00",)


def test_imaginary_ramp_is_counterclockwise():
    lam = np.array([1.0, 0.5, 0.25])
    fam = LinearBetaFamily([2.0, 2.0, 2.0], 1j * lam)
    pc = classify_beta_point(fam, 0.0)
    assert pc.label == "I0+" and pc.prediction == CCW
    path = track_eigenangles(fam, np.linspace(-1, 1, 41))
    assert path.direction(0, 40) == CCW


@pytest.mark.parametrize("kind,expect", [(1, True), (-1, False)])
def test_fixed_k_rule_checked_by_tracking(kind, expect):
    # the stated clockwise cell I-0 & K- is kept as stated; tracking flags it
    w = 2.0 - 2j * kind
    fam = LinearBetaFamily([w] * 3, [0.1 * kind + 0j] * 3)
    rep = scan_intervals(fam, np.linspace(0.0, 1.0, 21))
    (iv,) = rep.intervals
    assert iv.label == ("I+0&K+" if kind > 0 else "I-0&K-")
    assert iv.observed == CCW
    assert iv.agrees is expect


def test_beta_classifier_requires_schur_family():
    with pytest.raises(FamilyError, match="schur-family required"):
        classify_beta_point(table1_family(3), 0.0)


def test_classify_point_dispatch():
    assert classify_point(table1_family(5), -9.0).rule == "dissipative"
    assert classify_point(HypergeometricFamily(1.0, 2), 1.0).rule == "fixed-H"


# -- certificates ----------------------------------------------------------


def test_scalar_certificate_and_motion():
    fam = scalar_family()
    A = fam.matrix(0.0)
    from popuc.tridiag import cayley_transform

    # independent scalar oracle: arg of A^{-1} A^* = (1 - it)/(1 + it) decreases
    args = [cmath.phase((1 - 1j * t) / (1 + 1j * t)) for t in (-0.1, 0.0, 0.1)]
    assert args[0] > args[1] > args[2]
    assert abs(cayley_transform(A)[0, 0] - 1) <= 1e-15
    pc = classify_matrix_point(fam, 0.0)
    # dH = 0: no matrix-rule set applies
    assert pc.label == "I0+&H+" and pc.predicted is None
    d = derivatives(fam, 0.0)
    assert nm.max_norm(d.dK - np.eye(1)) <= 1e-9
    # the same scalar as a beta family: A = conj(beta_0) with beta_0 = 1 - it
    bf = LinearBetaFamily([1.0], [-1j])
    assert abs(bf.system(0.3).A[0, 0] - (1 + 0.3j)) <= 1e-15
    db = derivatives(bf, 0.0, with_sqrt=True)
    form = motion_certificate(bf.system(0.0), db, bf.spectrum(0.0)[0])
    assert abs(form - 1.0) <= 1e-8
    pb = classify_beta_point(bf, 0.0)
    assert pb.label == "I0-" and pb.prediction == CW
    assert track_eigenangles(bf, np.linspace(-0.5, 0.5, 11)).direction(0, 10) == CW


def test_hypergeometric_certificates_are_positive():
    fam = HypergeometricFamily(1.0, 3)
    b = 2.0
    sysm = fam.system(b)
    d = derivatives(fam, b, with_sqrt=True)
    for eta in fam.zeros(b):
        assert motion_certificate(sysm, d, eta) > 0


def test_constant_certificate_is_zero():
    fam = constant_beta_family([2 + 1j, 3 - 1j])
    sysm = fam.system(0.0)
    d = derivatives(fam, 0.0, with_sqrt=True)
    for eta in fam.spectrum(0.0):
        assert abs(motion_certificate(sysm, d, eta)) <= 1e-9


def test_certificate_transpose_variant_on_real_data(rng):
    # H, K real: L^T and L^* coincide
    from popuc.monotone import DerivativePair
    from popuc.tridiag import DissipativeSystem

    def sym(m):
        return (m + m.T) / 2

    H = sym(rng.standard_normal((4, 4))) + 4 * np.eye(4)
    K = sym(rng.standard_normal((4, 4)))
    sysm = DissipativeSystem(None, H + 1j * K, H, K)
    d = DerivativePair(np.eye(4), sym(rng.standard_normal((4, 4))), 0.0, 1e-5, sym(rng.standard_normal((4, 4))))
    C = certificate_matrix(sysm, d)
    assert nm.max_norm(C - certificate_matrix(sysm, d, transpose=True)) <= 1e-12
    # and for complex data they differ
    Kc = K + 1j * (np.eye(4, k=1) - np.eye(4, k=-1))
    sysc = DissipativeSystem(None, H + 1j * Kc, H, Kc)
    assert nm.max_norm(certificate_matrix(sysc, d) - certificate_matrix(sysc, d, transpose=True)) > 1e-3


def test_certificate_needs_dr():
    fam = HypergeometricFamily(1.0, 2)
    with pytest.raises(ValueError):
        certificate_matrix(fam.system(0.0), derivatives(fam, 0.0))


def test_lyapunov_constant_is_inconclusive():
    fam = constant_beta_family([2 + 1j, 3 - 1j])
    verdict, pred = lyapunov_sufficient(derivatives(fam, 0.0, with_sqrt=True), fam.system(0.0))
    assert verdict == nm.INDEFINITE and pred is None


def test_lyapunov_dk_minus_identity():
    # H fixed (dR = 0) and dK = -I: (L + L^*) - dK = I
    fam = LinearBetaFamily([2 + 1j, 2 + 1j, 2 + 1j], [1j, 1j, 1j])
    d = derivatives(fam, 0.0, with_sqrt=True)
    assert nm.max_norm(d.dR) <= 1e-9
    assert nm.max_norm(d.dK + np.eye(3)) <= 1e-8
    verdict, pred = lyapunov_sufficient(d, fam.system(0.0))
    assert verdict == nm.POSITIVE and pred == CCW


def test_lyapunov_consistent_with_certificates():
    fam = HypergeometricFamily(2.5, 4)
    for b in (0.5, 3.0, 8.0):
        d = derivatives(fam, b, with_sqrt=True)
        sysm = fam.system(b)
        verdict, pred = lyapunov_sufficient(d, sysm)
        signs = {motion_certificate(sysm, d, eta) > 0 for eta in fam.zeros(b)}
        if pred == CCW:
            assert signs == {False}
        if pred == CW:
            assert signs == {True}


# -- derivative identity ---------------------------------------------------


def test_derivative_identity_hypergeometric():
    fam = HypergeometricFamily(1.0, 3)
    for k in range(4):
        assert derivative_identity_residual(fam, 5.0, k) <= 1e-4


def test_derivative_identity_constant():
    fam = constant_beta_family([2 + 1j, 3 - 1j])
    from popuc.monotone import derivative_identity_terms

    for k in range(2):
        lhs, rhs = derivative_identity_terms(fam, 0.0, k)
        assert abs(lhs) <= 1e-9 and abs(rhs) <= 1e-9


def test_derivative_identity_needs_schur_family():
    with pytest.raises(FamilyError, match="schur-family required"):
        derivative_identity_residual(table1_family(5), 0.0, 0)


# -- tracking --------------------------------------------------------------


def test_tracking_matches_table_rows():
    fam = table1_family(5)
    grid = np.arange(-9.0, 0.0001, 0.05)
    path = track_eigenangles(fam, grid)
    for t in (-9.0, -7.0, -6.3, 0.0):
        k = int(np.argmin(np.abs(grid - t)))
        row = next(r for r in TABLE1 if r[1] == t)
        got = np.sort(path.wrapped[:, k])
        assert np.allclose(got, [float(x) for x in row[2]], atol=1e-5)


def test_tracking_reproduces_spectrum():
    fam = table1_family(5)
    grid = np.linspace(2 * math.pi, 7 * math.pi, 200)
    path = track_eigenangles(fam, grid)
    for k in range(0, grid.size, 17):
        spec = normalize_angle(fam.spectrum(grid[k]))
        assert multiset_error(np.exp(1j * path.wrapped[:, k]), np.exp(1j * spec)) <= 1e-9


def test_tracking_constant_family():
    path = track_eigenangles(constant_matrix_family(np.diag([1 + 1j, 2 + 1j])), np.linspace(0, 1, 5))
    assert np.all(path.steps() == 0)
    assert path.direction(0, 4) == "constant"


def test_tracking_refines_and_fails():
    fam = table1_family(5)
    path = track_eigenangles(fam, [-2.0, 2.0])
    assert path.methods[0].startswith("assignment+refine")
    with pytest.raises(TrackingError):
        track_eigenangles(fam, [-2.0, 2.0], max_refine=0)


def test_tracking_tabulated_coarse_fails():
    fam = tabulated_family(emit_table(table1_family(5), [-2.0, 2.0]))
    with pytest.raises(TrackingError):
        track_eigenangles(fam, [-2.0, 2.0])


def test_tracking_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        track_eigenangles(table1_family(3), [1.0, 0.0])


# -- interval scans --------------------------------------------------------


@pytest.fixture(scope="module")
def table1_report():
    return scan_intervals(table1_family(5), np.arange(-10.0, 20.0 + 1e-9, 0.05))


def test_scan_table1_h_boundaries(table1_report):
    b = np.array(table1_report.boundaries())
    assert np.min(np.abs(b - SQRT3)) <= 1e-6
    assert np.min(np.abs(b + SQRT3)) <= 1e-6


def test_scan_table1_predictions_agree(table1_report):
    predicted = [iv for iv in table1_report.intervals if iv.predicted is not None]
    assert predicted
    for iv in predicted:
        assert iv.predicted == CCW
        assert iv.label in ("I++&H-", "I+-&H+")
        assert iv.agrees


def test_scan_table1_not_monotone_windows(table1_report):
    path = table1_report.path
    for lo, hi in ((3 * math.pi, 4 * math.pi), (5 * math.pi, 6 * math.pi)):
        ks = np.nonzero((table1_report.grid > lo) & (table1_report.grid < hi))[0]
        assert path.direction(ks[0], ks[-1]) == "mixed"
        for pc in table1_report.points[ks[0]:ks[-1] + 1]:
            assert pc.predicted is None


def test_scan_intervals_partition(table1_report):
    ivs = table1_report.intervals
    assert ivs[0].first == 0 and ivs[-1].last == table1_report.grid.size - 1
    for a, b in zip(ivs, ivs[1:]):
        assert b.first == a.last + 1 and a.end == b.start


def test_scan_hypergeometric_single_clockwise():
    rep = scan_intervals(HypergeometricFamily(1.5, 5), np.arange(0, 101) * 0.1)
    assert len(rep.intervals) == 1
    iv = rep.intervals[0]
    assert iv.predicted == CW and iv.observed == CW


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
@pytest.mark.parametrize("n", [2, 5])
def test_prediction_soundness_hypergeometric(a, n):
    rep = scan_intervals(HypergeometricFamily(a, n), np.arange(0, 101) * 0.1)
    for iv in rep.intervals:
        if iv.predicted is not None:
            d = np.diff(rep.path.angles[:, iv.first:iv.last + 1], axis=1)
            assert np.all(d < -1e-9) if iv.predicted == CW else np.all(d > 1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_prediction_soundness_random_beta(seed):
    fam = random_beta_family(3, seed)
    rep = scan_intervals(fam, np.linspace(0.0, 2.0, 41))
    for iv in rep.intervals:
        if iv.predicted is None:
            continue
        d = np.diff(rep.path.angles[:, iv.first:iv.last + 1], axis=1)
        if iv.predicted == CCW:
            assert np.all(d > 1e-9)
        else:
            assert np.all(d < -1e-9)


def test_scan_tabulated_uses_midpoint_boundaries():
    fam = table1_family(5)
    grid = np.arange(1.0, 2.6, 0.1)
    rep = scan_intervals(tabulated_family(emit_table(fam, grid)), grid)
    b = rep.boundaries()
    assert any(abs(x - SQRT3) <= 0.05 + 1e-12 for x in b)


def test_scan_records_zeta_choice():
    from popuc.families import schur_path_family
    from popuc.schur import SchurParameters

    fam = schur_path_family(lambda t: SchurParameters([0.3 * t, 0.2j], 1.0))
    rep = scan_intervals(fam, np.linspace(0.0, 1.0, 6))
    assert rep.zeta is not None and rep.notes
