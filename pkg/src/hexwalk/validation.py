"""Cross-validation suites: every analytic formula against the exact engine.

Each suite pits a closed-form object (four-region probabilities,
symmetry relations, generating function, moments, cumulant limits)
against an independent computation, mostly exact-rational evolution of
the forward recursion.  The suites are sized so the full battery runs in
seconds from the command line; the acceptance tests run the same code at
the larger documented sizes.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import closedform, deviations, engine, generating
from .lattice import StepProbabilities

F = Fraction

#: Named parameter sets used across all cross-checks: the uniform walk,
#: a generic asymmetric walk, two walks satisfying symmetry premises
#: (one with unit cross-ratio, one with ratio parameter 3/2), a walk with
#: both middle directions switched off, and a walk whose cross-ratio is
#: undefined (exercises the engine fallback of the closed form).
PARAMETER_BATTERY = (
    ("uniform", StepProbabilities.uniform()),
    (
        "asymmetric",
        StepProbabilities((F(1, 2), F(1, 4), F(1, 4)), (F(1, 5), F(3, 10), F(1, 2))),
    ),
    (
        "axis-symmetric",
        StepProbabilities((F(1, 5), F(2, 5), F(2, 5)), (F(3, 5), F(1, 5), F(1, 5))),
    ),
    (
        "center-symmetric",
        StepProbabilities((F(1, 2), F(3, 10), F(1, 5)), (F(1, 2), F(1, 5), F(3, 10))),
    ),
    (
        "no-middle",
        StepProbabilities((F(3, 5), F(0), F(2, 5)), (F(3, 10), F(0), F(7, 10))),
    ),
    (
        "degenerate-ratio",
        StepProbabilities((F(1, 2), F(1, 2), F(0)), (F(1, 4), F(1, 4), F(1, 2))),
    ),
)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_violation: float
    details: dict

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_violation": self.max_violation,
            "details": self.details,
        }


def _even_snapshots(q, m_max, exact=True):
    for dist in engine.iterate(q, 2 * m_max, exact=exact):
        if dist.n % 2 == 0 and dist.n > 0:
            yield dist.n // 2, dist


def suite_closedform(m_max: int = 5, battery=PARAMETER_BATTERY) -> SuiteResult:
    """Four-region closed form versus exact iteration, both arithmetic modes.

    Rational mode must agree exactly (and sum to one exactly over the
    regions); float mode must agree within 1e-12 per state.
    """
    exact_ok = True
    float_worst = 0.0
    details = {}
    for name, q in battery:
        for m, dist in _even_snapshots(q, m_max, exact=True):
            cf = closedform.closed_form_distribution(2 * m, q)
            keys = set(dist.mass) | set(cf.mass)
            if any(cf[jk] != dist[jk] for jk in keys):
                exact_ok = False
                details.setdefault("exact_mismatches", []).append([name, m])
            if sum(cf.mass.values(), Fraction(0)) != 1:
                exact_ok = False
                details.setdefault("region_sum_failures", []).append([name, m])
        qf = q.as_float()
        for m, dist in _even_snapshots(qf, m_max, exact=False):
            cf = closedform.closed_form_distribution(2 * m, qf)
            keys = set(dist.mass) | set(cf.mass)
            worst = max(abs(cf[jk] - dist[jk]) for jk in keys)
            float_worst = max(float_worst, worst)
    details["float_max_abs_error"] = float_worst
    passed = exact_ok and float_worst <= 1e-12
    return SuiteResult("closedform", passed, float_worst, details)


def suite_odd_times(m_max: int = 4, battery=PARAMETER_BATTERY) -> SuiteResult:
    """Odd-time closed form versus exact iteration, including support ranges."""
    passed = True
    details = {}
    for name, q in battery:
        for dist in engine.iterate(q, 2 * m_max + 1, exact=True):
            if dist.n % 2 == 0:
                continue
            n = dist.n
            m = (n - 1) // 2
            cf = closedform.closed_form_distribution(n, q)
            keys = set(dist.mass) | set(cf.mass)
            if any(cf[jk] != dist[jk] for jk in keys):
                passed = False
                details.setdefault("mismatches", []).append([name, n])
            outside = [
                jk for jk in dist.mass if not closedform.odd_in_support(jk[0], jk[1], m)
            ]
            if outside:
                passed = False
                details.setdefault("support_violations", []).append([name, n, outside])
    return SuiteResult("odd-times", passed, 0.0 if passed else math.inf, details)


def suite_symmetry(m: int = 4, battery=PARAMETER_BATTERY) -> SuiteResult:
    """Reflection identities hold exactly, with unit cross-ratio, where applicable."""
    worst = Fraction(0)
    details = {"applicable_cases": {}}
    passed = True
    for name, q in battery:
        report = closedform.check_symmetry(q, m)
        applicable = [c.name for c in report.cases if c.applicable]
        details["applicable_cases"][name] = applicable
        for case in report.cases:
            if case.applicable:
                worst = max(worst, case.max_violation)
        if applicable:
            if report.rho is None or report.rho != 1:
                passed = False
                details.setdefault("rho_failures", []).append(name)
    worst = float(worst)
    passed = passed and worst == 0.0
    return SuiteResult("symmetry", passed, worst, details)


def suite_moments(n_max: int = 20, battery=PARAMETER_BATTERY) -> SuiteResult:
    """Analytic moment formulas versus brute-force moments of the engine."""
    worst = 0.0
    for name, q in battery:
        for dist in engine.iterate(q, n_max, exact=True):
            summary = generating.moments(dist.n, q)
            mean, var, cov = engine.distribution_moments(dist, q.a)
            pairs = [
                (summary.mean[0], mean[0]),
                (summary.mean[1], mean[1]),
                (summary.variance[0], var[0]),
                (summary.variance[1], var[1]),
                (summary.covariance, cov),
            ]
            for analytic, oracle in pairs:
                worst = max(worst, abs(analytic - oracle) / (1.0 + abs(analytic)))
    return SuiteResult("moments", worst <= 1e-10, worst, {"relative_tolerance": 1e-10})


def suite_pgf(
    n_max: int = 8, grid=(0.8, 1.0, 1.25), battery=PARAMETER_BATTERY
) -> SuiteResult:
    """Factorized generating function versus brute-force expectation."""
    worst = 0.0
    for name, q in battery:
        for dist in engine.iterate(q, n_max, exact=True):
            for u in grid:
                for v in grid:
                    expected = engine.pgf_expectation(dist, u, v, q.a)
                    got = generating.pgf(u, v, dist.n, q)
                    worst = max(worst, abs(got - expected) / abs(expected))
    return SuiteResult("pgf", worst <= 1e-10, worst, {"relative_tolerance": 1e-10})


def suite_deviations(battery=PARAMETER_BATTERY) -> SuiteResult:
    """Identities of the scaled cumulant generating function.

    Checks the value and gradient at the origin, the Hessian at the
    origin against the asymptotic covariance, and (for the uniform walk)
    the three-cosh form of the limit.
    """
    worst = 0.0
    details = {}
    lam_grid = [(x, y) for x in (-2.0, -0.5, 0.0, 1.0, 2.0) for y in (-2.0, 0.5, 1.5)]
    for name, q in battery:
        worst = max(worst, abs(deviations.cgf(0.0, 0.0, q)))
        grad = deviations.cgf_gradient(0.0, 0.0, q)
        drift = generating.moments(2, q).drift
        worst = max(worst, float(np.linalg.norm(grad - np.array(drift))))
        hess = deviations.cgf_hessian(0.0, 0.0, q)
        c_matrix = generating.asymptotic_covariance(q)
        worst = max(worst, float(np.linalg.norm(hess - c_matrix)))

    uniform = StepProbabilities.uniform()
    a = uniform.a
    root3 = math.sqrt(3.0)
    cosh_worst = 0.0
    for lam1, lam2 in lam_grid:
        direct = deviations.cgf(lam1, lam2, uniform)
        cosh_form = 0.5 * math.log(
            1.0 / 3.0
            + (2.0 / 9.0)
            * (
                math.cosh(root3 * a * (0.5 * root3 * lam1 - 0.5 * lam2))
                + math.cosh(root3 * a * (0.5 * root3 * lam1 + 0.5 * lam2))
                + math.cosh(lam2 * root3 * a)
            )
        )
        cosh_worst = max(cosh_worst, abs(direct - cosh_form))
    details["cosh_identity_max_error"] = cosh_worst
    worst = max(worst, cosh_worst)
    return SuiteResult("deviations", worst <= 1e-8, worst, details)


SUITES = {
    "closedform": suite_closedform,
    "odd-times": suite_odd_times,
    "symmetry": suite_symmetry,
    "moments": suite_moments,
    "pgf": suite_pgf,
    "deviations": suite_deviations,
}


def run_suites(names=None, **overrides):
    """Run the named suites (default: all) and return their results."""
    if names is None:
        names = list(SUITES)
    results = []
    for name in names:
        fn = SUITES[name]
        kwargs = {}
        if "m" in overrides and name in ("symmetry",):
            kwargs["m"] = overrides["m"]
        if "m_max" in overrides and name in ("closedform", "odd-times"):
            kwargs["m_max"] = overrides["m_max"]
        results.append(fn(**kwargs))
    return results
