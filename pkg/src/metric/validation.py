"""
Sampled validation of the metric axioms.
"""
from typing import TYPE_CHECKING

import numpy as np

from ..config import settings
from ..errors import DomainError
from ..logger import logger
from .base import SubFinslerMetric
from .legendre import dual_metric, legendre
from .models import AxiomCheck, ValidationReport

if TYPE_CHECKING:
    from ..systems.models import System

HOMOGENEITY_TOL = 1e-9
DUALITY_TOL = 1e-8


def validate(
    metric: SubFinslerMetric,
    system: "System",
    samples: int,
    seed: int = 0,
    half_width: float = None,
    duality_samples: int = 1000,
) -> ValidationReport:
    """
    Check homogeneity, nonnegativity, Hessian positivity and F*∘𝓛 = F on random samples.

    Args:
        metric: metric under test
        system: supplies the chart dimension and sampling box
        samples: number of (x, u, λ) samples
        seed: RNG seed
        half_width: half-width of the coordinate box, default from settings
        duality_samples: leading samples on which F*∘𝓛 = F is also checked

    Returns:
        Report with per-axiom worst values; failures are entries, never exceptions
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    half_width = settings.sampling_half_width if half_width is None else half_width
    rng = np.random.default_rng(seed)
    n, k = system.n, metric.rank

    xs = rng.uniform(-half_width, half_width, size=(samples, n))
    us = rng.standard_normal(size=(samples, k))
    lambdas = rng.uniform(-3.0, 3.0, size=samples)

    max_violation = 0.0
    max_duality = 0.0
    min_eigen = np.inf
    min_norm = np.inf
    negative = homogeneity_failures = hessian_failures = duality_failures = domain_errors = 0

    duality_samples = min(samples, max(duality_samples, 0))
    for index, (x, u, lam) in enumerate(zip(xs, us, lambdas)):
        x, u = list(x), list(u)
        try:
            F = metric.norm(x, u)
            F_scaled = metric.norm(x, [lam * v for v in u])
            H = 2.0 * metric.hess_u(x, u)
            F_dual = dual_metric(metric, x, legendre(metric, x, u)) if index < duality_samples else None
        except DomainError:
            domain_errors += 1
            continue
        min_norm = min(min_norm, F)
        if F < 0:
            negative += 1
        violation = abs(F_scaled - abs(lam) * F) / max(abs(F), 1e-300)
        max_violation = max(max_violation, violation)
        if violation > HOMOGENEITY_TOL:
            homogeneity_failures += 1
        eigen = float(np.linalg.eigvalsh(0.5 * (H + H.T)).min())
        min_eigen = min(min_eigen, eigen)
        if eigen <= 0:
            hessian_failures += 1
        if F_dual is None:
            continue
        duality = abs(F_dual - F) / max(abs(F), 1e-300)
        max_duality = max(max_duality, duality)
        if duality > DUALITY_TOL:
            duality_failures += 1

    if domain_errors:
        logger.warning(f"Metric validation: {domain_errors} of {samples} samples outside the domain")

    checks = [
        AxiomCheck(
            name="homogeneity",
            worst=max_violation,
            threshold=HOMOGENEITY_TOL,
            passed=homogeneity_failures == 0 and domain_errors < samples,
            failures=homogeneity_failures,
        ),
        AxiomCheck(
            name="nonnegativity",
            worst=float(min_norm),
            threshold=0.0,
            passed=negative == 0 and domain_errors < samples,
            failures=negative,
        ),
        AxiomCheck(
            name="hessian_positivity",
            worst=float(min_eigen),
            threshold=0.0,
            passed=hessian_failures == 0 and domain_errors == 0,
            failures=hessian_failures + domain_errors,
        ),
        AxiomCheck(
            name="duality",
            worst=max_duality,
            threshold=DUALITY_TOL,
            passed=duality_failures == 0 and domain_errors < samples,
            failures=duality_failures,
        ),
    ]
    report = ValidationReport(
        samples=samples,
        seed=seed,
        duality_samples=duality_samples,
        max_homogeneity_violation=max_violation,
        min_hessian_eigenvalue=float(min_eigen),
        min_norm=float(min_norm),
        max_duality_error=max_duality,
        domain_errors=domain_errors,
        checks=checks,
    )
    logger.info(
        f"Validated {metric.describe()} on {samples} samples: "
        f"{'pass' if report.passed else 'fail'}"
    )
    return report
