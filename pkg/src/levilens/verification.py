"""Acceptance checks, grouped into suites for ``levilens verify``.

Each check returns a ``CriterionResult`` with the measured quantities that
decided it. Random samples come from fixed seeds so reports are
reproducible.
"""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .form_algebra import FormOperator, anticommutator, interior_op, wedge_op
from .geometry import DefiningFunctionSpec, MetricSpec, levi_form
from .heat_model import (
    HomogPoly,
    ModelSymbol,
    degeneracy_spectrum,
    hj_residual,
    poly_flow_exp,
    poly_flow_rank,
    vanishes_exactly_when,
)
from .kernels import (
    EULER_GAMMA,
    composition_check,
    euler_constant_limit,
    laplace_moment,
    moment_by_quadrature,
    oscillatory_quadrature,
)
from .oracles import DEFAULT_EPS_SCHEDULE, compare_bergman_asymptotics, levi_brute_force
from .phase import bergman_leading, szego_leading_symbol, szego_phase_jet

EPS = np.finfo(float).eps


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.number}] {self.title}"

    def to_json(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "pass": self.passed,
            "measured": self.measured,
            "seconds": round(self.seconds, 3),
        }


def random_eigenvalues(rng: np.random.Generator, count: int, low: float = 0.1, high: float = 10.0) -> np.ndarray:
    """Non-degenerate samples with ``|lambda| in [low, high]`` and random signs."""
    mags = np.exp(rng.uniform(math.log(low), math.log(high), size=count))
    return mags * rng.choice([-1.0, 1.0], size=count)


def hessian_determinant(det_constant_scale: float = 1.0, samples: int = 20, seed: int = 1) -> CriterionResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = 0.0
    ok = True
    for n in (2, 3, 4):
        for _ in range(samples):
            lam = random_eigenvalues(rng, n - 1)
            c = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
            rep = composition_check(lam, int(np.sum(lam > 0)), c=c, det_constant_scale=det_constant_scale)
            worst = max(worst, rep.det_relative_error)
            ok &= rep.det_relative_error <= 1e-8
    elapsed = time.perf_counter() - start
    return CriterionResult(
        1,
        "Hessian determinant det(H/i) = 2^(4n-3) prod lambda^2",
        bool(ok and elapsed < 1.0),
        {"max_relative_error": worst, "runtime_s": elapsed, "tolerance": 1e-8},
    )


def leading_idempotency(samples: int = 20, seed: int = 2) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    f_gap = 0.0
    for n in range(2, 6):
        for _ in range(samples):
            lam = random_eigenvalues(rng, n - 1)
            lead = szego_leading_symbol(lam, int(np.sum(lam > 0)))
            s0 = lead.s0
            factor = 2.0 * math.pi**n / float(np.prod(np.abs(lam)))
            scale = float(np.max(np.abs(s0.entries)))
            resid = float(np.max(np.abs((s0 @ s0 * factor - s0).entries))) / scale
            worst = max(worst, resid)
            f_gap = max(f_gap, float(np.max(np.abs((lead.F - s0 * math.factorial(n - 1)).entries))))
    ok = worst <= 4 * EPS and f_gap == 0.0
    return CriterionResult(
        2,
        "Leading-symbol idempotency and F = (n-1)! s0",
        bool(ok),
        {"max_relative_residual": worst, "max_F_gap": f_gap, "tolerance": 4 * EPS},
    )


def degeneracy_spectra(samples: int = 50, seed: int = 3) -> CriterionResult:
    rng = np.random.default_rng(seed)
    mismatches = 0
    cases = 0
    min_positive = math.inf
    for n in range(2, 7):
        for _ in range(samples):
            lam = random_eigenvalues(rng, n - 1)
            for q, branch in itertools.product(range(n), (1, -1)):
                spec = degeneracy_spectrum(lam, q, branch, sigma_abs=float(rng.uniform(0.5, 2.0)))
                cases += 1
                vanishes = spec.infimum == 0.0
                if vanishes != vanishes_exactly_when(lam, q, branch):
                    mismatches += 1
                if not vanishes:
                    min_positive = min(min_positive, spec.infimum)
                if not np.array_equal(np.sort(spec.operator_spectrum), np.sort(spec.values)):
                    mismatches += 1
    return CriterionResult(
        3,
        "Degeneracy spectra vanish exactly at q = n+ (positive branch) / q = n- (negative branch)",
        mismatches == 0,
        {"cases": cases, "mismatches": mismatches, "smallest_nonzero_infimum": min_positive},
    )


def moment_grid() -> list[complex]:
    """Points with ``Re x > 0`` and ``|Im x| <= 3 Re x``, where real-axis quadrature is well conditioned."""
    out = []
    for re in (0.1, 1.0, 10.0):
        for ratio in (-3.0, -1.0, 0.0, 0.5, 3.0):
            out.append(complex(re, ratio * re))
    return out


def laplace_moments() -> CriterionResult:
    worst = 0.0
    for m in list(range(0, 7)) + [-3, -2, -1]:
        for x in moment_grid():
            closed = laplace_moment(m, x)
            worst = max(worst, abs(closed - moment_by_quadrature(m, x)) / abs(closed))
            if m >= 0:
                phi = 1j * x  # x = -i phi
                worst = max(worst, abs(closed - oscillatory_quadrature(phi, [m])[0]) / abs(closed))
    gamma_err = abs(euler_constant_limit() - EULER_GAMMA)
    return CriterionResult(
        4,
        "Laplace moments against quadrature; Euler constant from its limit definition",
        bool(worst <= 1e-8 and gamma_err <= 1e-10),
        {"max_relative_error": worst, "euler_constant_error": gamma_err},
    )


def phase_identities(samples: int = 10, seed: int = 5) -> dict:
    """Largest violation of each second-order identity of the Szegő jet."""
    rng = np.random.default_rng(seed)
    err: dict[str, float] = {}

    def note(key, value):
        err[key] = max(err.get(key, 0.0), float(value))

    for n in range(2, 6):
        for _ in range(samples):
            lam = random_eigenvalues(rng, n - 1)
            c = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
            jet = szego_phase_jet(lam, c)
            k = jet.half
            top = 2 * n - 1
            omega0 = np.zeros(k)
            omega0[top - 1] = math.sqrt(2.0)
            note("d_x = omega0", np.max(np.abs(jet.d_x() - omega0)))
            note("d_y = -omega0", np.max(np.abs(jet.d_y() + omega0)))
            for j, l in itertools.product(range(1, n), repeat=2):
                zj, zbj = jet.wirtinger(j, "x"), jet.wirtinger(j, "x", True)
                zl, zbl = jet.wirtinger(l, "x"), jet.wirtinger(l, "x", True)
                wl, wbl = jet.wirtinger(l, "y"), jet.wirtinger(l, "y", True)
                delta = 1.0 if j == l else 0.0
                lj = lam[j - 1]
                if lj > 0:
                    note("zbar_j w_k = -2i lambda_j delta", abs(jet.second(zbj, wl) + 2j * lj * delta))
                else:
                    note("z_j wbar_k = 2i lambda_j delta", abs(jet.second(zj, wbl) - 2j * lj * delta))
                note("z_j z_k = 0", abs(jet.second(zj, zl)))
                note("zbar_j zbar_k = 0", abs(jet.second(zbj, zbl)))
                note("z_j w_k = 0", abs(jet.second(zj, wl)))
                note("zbar_j wbar_k = 0", abs(jet.second(zbj, wbl)))
                note("z_j zbar_k = i|lambda_j| delta", abs(jet.second(zj, zbl) - 1j * abs(lj) * delta))
            xt, yt = jet.axis(top, "x"), jet.axis(top, "y")
            for j in range(1, n):
                note("z_j x_top = c_j", abs(jet.second(jet.wirtinger(j, "x"), xt) - c[j - 1]))
                note("w_j y_top = -c_j", abs(jet.second(jet.wirtinger(j, "y"), yt) + c[j - 1]))
            note("x_top x_top = 0", abs(jet.second(xt, xt)))
            diag = jet.block("x", "x") + jet.block("x", "y") + jet.block("y", "x") + jet.block("y", "y")
            note("vanishes on the diagonal", np.max(np.abs(diag)))
            sw = jet.swapped()
            note("antisymmetry", max(np.max(np.abs(sw.hessian + jet.hessian.conj())), np.max(np.abs(sw.linear + jet.linear.conj()))))
            note("Im part PSD (negative eigenvalue)", max(0.0, -np.linalg.eigvalsh(jet.hessian.imag)[0]))
    return err


def phase_jet_constraints() -> CriterionResult:
    err = phase_identities()
    psd = err.pop("Im part PSD (negative eigenvalue)")
    exact = max(err.values())
    return CriterionResult(
        5,
        "Szegő phase-jet identities; Im part positive semidefinite",
        bool(exact <= 1e-13 and psd <= 1e-10),
        {"max_identity_violation": exact, "psd_violation": psd, "per_identity": err},
    )


def positive_spectrum_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    b = rng.normal(size=(d, d))
    shift = max(0.0, -np.min(np.linalg.eigvals(b).real)) + rng.uniform(0.2, 1.0)
    return b + shift * np.eye(d)


def heat_model_checks(points: int = 1000, seed: int = 6) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_hj = 0.0
    for _ in range(points):
        d = int(rng.integers(1, 5))
        inert = int(rng.integers(0, 3))
        sym = ModelSymbol(positive_spectrum_matrix(rng, d), inert)
        x = rng.normal(size=inert + d)
        eta = rng.normal(size=inert + d)
        worst_hj = max(worst_hj, abs(hj_residual(float(rng.uniform(0, 10)), sym, x, eta)))
    worst_group = 0.0
    rank_ok = True
    for d in (1, 2, 3):
        a = positive_spectrum_matrix(rng, d)
        for m in range(0, 5):
            expected = 0 if m == 0 else math.comb(m + d - 1, d - 1)
            rank_ok &= poly_flow_rank(a, d, m) == expected
            vec = rng.normal(size=math.comb(m + d - 1, d - 1))
            u = HomogPoly.from_vector(d, m, vec)
            s, t = rng.uniform(0, 1, size=2)
            lhs = poly_flow_exp(s + t, a, u)
            rhs = poly_flow_exp(s, a, poly_flow_exp(t, a, u))
            size = max(float(np.max(np.abs(lhs.vector()))), 1.0)
            worst_group = max(worst_group, float(np.max(np.abs(lhs.vector() - rhs.vector()))) / size)
    return CriterionResult(
        6,
        "Heat model: Hamilton-Jacobi residual, group law, bijectivity on P^m",
        bool(worst_hj <= 1e-12 and worst_group <= 1e-10 and rank_ok),
        {"max_hj_residual": worst_hj, "max_group_law_relative_error": worst_group, "ranks_ok": rank_ok},
    )


def car_identities(seed: int = 7) -> CriterionResult:
    violations = 0
    for m in range(1, 5):
        for q in range(0, m + 1):
            eye = FormOperator.identity(m, q)
            for j, k in itertools.product(range(1, m + 1), repeat=2):
                left = (wedge_op(j, m, q - 1) @ interior_op(k, m, q)) if q >= 1 else FormOperator.zeros(m, q, q)
                right = (interior_op(k, m, q + 1) @ wedge_op(j, m, q)) if q < m else FormOperator.zeros(m, q, q)
                expected = eye * (1.0 if j == k else 0.0)
                if not np.array_equal((left + right).entries, expected.entries):
                    violations += 1
            # boundary coframe t_j against the unit normal scaled so |dbar r|^2 = 1/2
            normal = np.zeros(m, dtype=complex)
            normal[-1] = math.sqrt(0.5)
            if not anticommutator(normal, normal, q).allclose(eye * 0.5, atol=4 * EPS):
                violations += 1
            for j in range(1, m):
                t = np.zeros(m, dtype=complex)
                t[j - 1] = 1.0
                if not np.array_equal(anticommutator(t, normal, q).entries, np.zeros_like(eye.entries)):
                    violations += 1
    rng = np.random.default_rng(seed)
    route_gap = 0.0
    for n in range(2, 6):
        for _ in range(10):
            lam = random_eigenvalues(rng, n - 1)
            lead = bergman_leading(lam, int(np.sum(lam < 0)))
            route_gap = max(route_gap, float(np.max(np.abs((lead.a0 - lead.a0_projection_route).entries))))
    return CriterionResult(
        7,
        "Anticommutation identities; a0 by both routes",
        bool(violations == 0 and route_gap == 0.0),
        {"violations": violations, "a0_route_gap": route_gap},
    )


def ball_oracle(eps_schedule=DEFAULT_EPS_SCHEDULE, truncation: int = 40) -> CriterionResult:
    start = time.perf_counter()
    reports = {n: compare_bergman_asymptotics(n, 0, eps_schedule, truncation) for n in (1, 2)}
    elapsed = time.perf_counter() - start
    measured = {
        f"n={n}": {
            "slope": r.slope,
            "slope_vs_eps": r.slope_vs_eps,
            "final_ratio": r.ratios[-1],
            "final_volume_corrected_ratio": r.corrected_ratios[-1],
            "cauchy_gap": r.cauchy_gap,
            "closed_form_error": r.closed_form_error,
        }
        for n, r in reports.items()
    }
    measured["runtime_s"] = elapsed
    return CriterionResult(
        8,
        "Ball oracle: blow-up slope -(n+1), Cauchy constant ratio",
        bool(all(r.passed for r in reports.values()) and elapsed < 60.0),
        measured,
    )


def builtin_cases() -> list[tuple[DefiningFunctionSpec, np.ndarray, np.ndarray | None]]:
    """``(spec, point, expected eigenvalues or None)`` covering every builtin."""
    rng = np.random.default_rng(9)
    cases: list[tuple[DefiningFunctionSpec, np.ndarray, np.ndarray | None]] = []
    for lam in ([1.0], [2.0, -3.0], [0.5, -1.5, 4.0], [-0.3]):
        n = len(lam) + 1
        cases.append((DefiningFunctionSpec.builtin("quadric", lam), np.zeros(2 * n), np.sort(lam)[::-1]))
    for name, n, radius in (("sphere", 2, 1.0), ("sphere", 3, 2.0), ("shell", 2, 1.0), ("shell", 3, 0.5)):
        for _ in range(2):
            v = rng.normal(size=2 * n)
            cases.append((DefiningFunctionSpec.builtin(name, [radius], n=n), radius * v / np.linalg.norm(v), None))
    return cases


def levi_cross_route() -> CriterionResult:
    worst_cross = 0.0
    worst_recovery = 0.0
    for spec, p, expected in builtin_cases():
        metric = MetricSpec.euclidean(spec.n)
        data = levi_form(spec, metric, p)
        brute = levi_brute_force(spec, metric, p, data.frame)
        worst_cross = max(worst_cross, float(np.max(np.abs(brute - data.levi_matrix))))
        if expected is not None:
            worst_recovery = max(worst_recovery, float(np.max(np.abs(data.eigenvalues - expected))))
    return CriterionResult(
        9,
        "Levi form: commutator route against the d(omega_0) route; quadric eigenvalue recovery",
        bool(worst_cross <= 1e-5 and worst_recovery <= 1e-8),
        {"max_cross_route_gap": worst_cross, "max_eigenvalue_error": worst_recovery},
    )


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: hessian_determinant,
    2: leading_idempotency,
    3: degeneracy_spectra,
    4: laplace_moments,
    5: phase_jet_constraints,
    6: heat_model_checks,
    7: car_identities,
    8: ball_oracle,
    9: levi_cross_route,
}

SUITES: dict[str, tuple[int, ...]] = {
    "geometry": (9,),
    "algebra": (5, 7),
    "heat": (3, 6),
    "kernels": (1, 2, 4),
    "oracles": (8,),
    "all": tuple(range(1, 10)),
}


def run_suite(
    suite: str,
    eps_schedule=DEFAULT_EPS_SCHEDULE,
    truncation: int = 40,
    det_constant_scale: float = 1.0,
    threads: int = 1,
) -> list[CriterionResult]:
    """Run a suite; results come back in criterion order whatever the thread count."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")

    def run(number: int) -> CriterionResult:
        kwargs: dict = {}
        if number == 1:
            kwargs["det_constant_scale"] = det_constant_scale
        if number == 8:
            kwargs.update(eps_schedule=eps_schedule, truncation=truncation)
        start = time.perf_counter()
        res = CRITERIA[number](**kwargs)
        res.seconds = time.perf_counter() - start
        return res

    numbers = SUITES[suite]
    if threads <= 1:
        return [run(k) for k in numbers]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, numbers))
