"""Property suite over random Schur parameter arrays.

Every instance is pushed through the whole chain (G, recovered parameters,
zeros, pseudoreflections, betas, dissipative system, Cayley transform) and
each identity is measured against its threshold.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import numerics as nm
from .errors import PopucError
from .matching import circular_match_error
from .schur import (
    SchurParameters,
    build_hessenberg,
    circular_gaps,
    normalize_angle,
    random_parameters,
    recover_parameters,
    schur_complement_check,
    unitarity_residual,
)
from .tridiag import (
    BetaSequence,
    assemble_system,
    beta_from_charpoly,
    cayley_unitarity_residual,
    cot_identity_residual,
    default_zeta,
    matrix_form_residual,
    p_zeros,
    pseudo_reflections,
)

# name -> (threshold, True if the value must stay at or below it)
THRESHOLDS = {
    "unitarity": (1e-12, True),
    "round_trip": (1e-10, True),
    "modulus": (1e-10, True),
    "min_gap": (1e-8, False),
    "coincidence": (1e-8, True),
    "cot_identity": (1e-8, True),
    "matrix_form": (1e-10, True),
    "schur_complement": (1e-10, True),
    "cayley_unitarity": (1e-9, True),
}
CHECKS = tuple(THRESHOLDS)


@dataclass
class InstanceReport:
    params: SchurParameters
    zeta: Optional[complex]
    values: dict
    error: Optional[str] = None

    @property
    def failures(self) -> list:
        if self.error is not None:
            return ["error"]
        bad = []
        for name, (thr, upper) in THRESHOLDS.items():
            v = self.values.get(name)
            if v is None or not np.isfinite(v) or (v > thr if upper else v < thr):
                bad.append(name)
        return bad

    @property
    def ok(self) -> bool:
        return not self.failures


def corrupt_beta(beta: BetaSequence) -> BetaSequence:
    """Test hook: perturb beta_0 so the zeros no longer coincide."""
    vals = beta.values.copy()
    vals[0] *= 1.5
    return BetaSequence(beta.zeta, beta.zeta_sqrt, vals, beta.provenance)


def check_instance(params: SchurParameters, corrupt: bool = False, seed: int = 0) -> InstanceReport:
    vals = {}
    zeta = None
    try:
        G = build_hessenberg(params).matrix
        vals["unitarity"] = unitarity_residual(G)
        back = recover_parameters(G)
        vals["round_trip"] = max(
            float(np.max(np.abs(back.alphas - params.alphas))), abs(back.tau - params.tau)
        )
        spec = nm.general_eig(G, vectors=False).values
        vals["modulus"] = float(np.max(np.abs(np.abs(spec) - 1.0)))
        vals["min_gap"] = float(circular_gaps(normalize_angle(spec)).min())
        zeta = default_zeta(spec)
        beta = beta_from_charpoly(params, zeta)
        if corrupt:
            beta = corrupt_beta(beta)
        system = assemble_system(beta, check=not corrupt)
        vals["coincidence"] = circular_match_error(p_zeros(beta), spec)
        vals["cot_identity"] = max(cot_identity_residual(system, eta) for eta in spec)
        rng = np.random.default_rng(seed)
        probe = complex(rng.normal(), rng.normal())
        vals["matrix_form"] = max(matrix_form_residual(system, z) for z in list(spec) + [probe])
        refl = pseudo_reflections(params, zeta, check_spectrum=False)
        vals["schur_complement"] = max(
            schur_complement_check(params, zeta, j, G=G, refl=refl, spectrum=spec) for j in range(1, params.n + 1)
        )
        vals["cayley_unitarity"] = cayley_unitarity_residual(system, factor="cholesky")
    except (PopucError, ArithmeticError) as exc:
        return InstanceReport(params, zeta, vals, f"{type(exc).__name__}: {exc}")
    return InstanceReport(params, zeta, vals)


@dataclass
class SuiteReport:
    sizes: list
    reports: list = field(default_factory=list)

    @property
    def worst(self) -> dict:
        out = {}
        for name, (_, upper) in THRESHOLDS.items():
            got = [r.values[name] for r in self.reports if name in r.values]
            if got:
                out[name] = max(got) if upper else min(got)
        return out

    @property
    def first_failure(self) -> Optional[InstanceReport]:
        for r in self.reports:
            if not r.ok:
                return r
        return None

    @property
    def ok(self) -> bool:
        return self.first_failure is None


def worker_count() -> int:
    """Pool size: POPUC_THREADS if set, else the CPU count."""
    env = os.environ.get("POPUC_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), 64))
        except ValueError:
            pass
    return cap


def run_suite(trials: int, seed: int, n: Optional[int] = None, n_max: int = 12,
              corrupt: bool = False, workers: Optional[int] = None) -> SuiteReport:
    """Random instances from a single seed; fixed order n, or n uniform in 1..n_max."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n is not None and n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    sizes = [n] * trials if n is not None else [int(k) for k in rng.integers(1, n_max + 1, trials)]
    seeds = [int(s) for s in rng.integers(0, 2**63 - 1, trials)]

    def one(k):
        return check_instance(random_parameters(sizes[k], seeds[k]), corrupt=corrupt, seed=seeds[k])

    workers = worker_count() if workers is None else workers
    if workers > 1 and trials > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(one, range(trials)))
    else:
        reports = [one(k) for k in range(trials)]
    return SuiteReport(sizes, reports)


def replay_text(report: InstanceReport) -> str:
    from .formats import format_complex, format_parameters

    lines = [f"# failing checks: {', '.join(report.failures)}"]
    if report.error:
        lines.append(f"# error: {report.error}")
    if report.zeta is not None:
        lines.append(f"# zeta: {format_complex(report.zeta)}")
    for name, v in report.values.items():
        lines.append(f"# {name}: {v:.3e}")
    return "\n".join(lines) + "\n" + format_parameters(report.params)
