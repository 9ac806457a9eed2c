"""
Flatness scans: Δ_F over a set of test functions and sample points.
"""
import asyncio
import os
from itertools import combinations
from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np

from ..config import settings
from ..errors import ConfigError, DomainError, InvalidRegion, RegularityError
from ..expr import parse
from ..logger import logger
from .models import FlatnessReport, SamplingBox, ScalarField, VolumeForm
from .operators import sub_laplacian

if TYPE_CHECKING:
    from ..systems.models import System

FLAT_TOLERANCE = 1e-6


def default_test_fields(system: "System") -> List[ScalarField]:
    """Coordinates, their squares and their pairwise products."""
    names = list(system.coordinate_names)
    sources = list(names)
    sources += [f"{a}^2" for a in names]
    sources += [f"{a}*{b}" for a, b in combinations(names, 2)]
    return [ScalarField(h=parse(s, names), label=s) for s in sources]


def _evaluate_point(
    system: "System", fields: Sequence[ScalarField], x: np.ndarray, volume: VolumeForm
) -> Optional[np.ndarray]:
    try:
        return np.array([sub_laplacian(system, f, x, volume) for f in fields])
    except (DomainError, RegularityError) as e:
        logger.debug(f"Skipping sample {x.tolist()}: {e}")
        return None


async def _evaluate_all(
    system: "System", fields: Sequence[ScalarField], points: np.ndarray, volume: VolumeForm, threads: int
) -> List[Optional[np.ndarray]]:
    semaphore = asyncio.Semaphore(max(1, threads))

    async def run(x: np.ndarray):
        async with semaphore:
            return await asyncio.to_thread(_evaluate_point, system, fields, x, volume)

    return await asyncio.gather(*(run(x) for x in points))


def flatness_scan(
    system: "System",
    test_fields: Optional[Sequence[ScalarField]] = None,
    region: Optional[SamplingBox] = None,
    samples: Optional[int] = None,
    seed: int = 0,
    volume: VolumeForm = VolumeForm.LEBESGUE,
    threads: Optional[int] = None,
) -> FlatnessReport:
    """
    Evaluate Δ_F on every test field at uniformly sampled points of a box.

    Args:
        test_fields: defaults to coordinates, squares and pairwise products
        region: defaults to the box of half-width ``settings.sampling_half_width``
        samples: number of points, ``settings.validation_samples`` when omitted

    Returns:
        FlatnessReport, flat iff the largest |Δ_F h| is at most 1e-6

    Raises:
        InvalidRegion: for an empty box, no samples or no test fields
    """
    fields = list(test_fields) if test_fields is not None else default_test_fields(system)
    if not fields:
        raise InvalidRegion("No test functions to scan")
    region = region or SamplingBox.centered(system.n, settings.sampling_half_width)
    if len(region.lower) != system.n:
        raise ConfigError(f"Sampling box has dimension {len(region.lower)}, system has {system.n}")
    count = settings.validation_samples if samples is None else samples
    if count <= 0 or region.is_empty:
        raise InvalidRegion("Empty sampling region")

    points = region.sample(count, seed)
    results = asyncio.run(_evaluate_all(system, fields, points, volume, threads or settings.threads or os.cpu_count() or 1))

    values = np.full((len(fields), count), np.nan)
    for s, column in enumerate(results):
        if column is not None:
            values[:, s] = column
    skipped = sum(r is None for r in results)
    if skipped == count:
        raise InvalidRegion("Every sample point lies outside the domain of the metric")
    max_abs = float(np.nanmax(np.abs(values)))
    flat = max_abs <= FLAT_TOLERANCE
    logger.info(f"Flatness scan on {system.name}: max |Δh| = {max_abs:.3e} over {count - skipped} points, flat={flat}")
    return FlatnessReport(
        fields=[f.name for f in fields],
        samples=points,
        values=values,
        max_abs=max_abs,
        flat=flat,
        tolerance=FLAT_TOLERANCE,
        skipped=skipped,
    )
