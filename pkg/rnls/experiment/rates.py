"""
Power-law rate fits of sweep quantities on log-log axes.
"""
from typing import Callable, Optional, Sequence, Tuple, Union
import math
import numpy as np
from scipy import stats
from ..module import Registry
from ..util import InvocationDebug
from ..util.errors import ConfigError, InsufficientDataError
from .records import RateFit, SweepRecord

transform_registry = Registry('rate_transform')

TRANSFORM = Union[str, Callable[[SweepRecord], float]]


@transform_registry.register('abs_omega')
def abs_omega(record: SweepRecord) -> float:
    return abs(record.omega)


@transform_registry.register('mass')
def mass(record: SweepRecord) -> float:
    return record.mass


@transform_registry.register('abs_action')
def abs_action(record: SweepRecord) -> float:
    return abs(record.action)


@transform_registry.register('abs_energy')
def abs_energy(record: SweepRecord) -> float:
    return abs(record.energy)


def omega_gap(lam: float) -> Callable[[SweepRecord], float]:
    """|omega + lambda_0|, the distance to the bifurcation point."""
    def transform(record: SweepRecord) -> float:
        return abs(record.omega + lam)
    return transform


def resolve_transform(transform: TRANSFORM) -> Callable[[SweepRecord], float]:
    if callable(transform):
        return transform
    if transform not in transform_registry:
        raise ConfigError(
            'unknown rate transform "{0}", expected one of {1}'.format(transform, transform_registry.names()),
            rule='registered rate_transform name'
        )
    return transform_registry.get(transform)


@InvocationDebug('analysis.fit_rate')
def fit_rate(
    records: Sequence[SweepRecord],
    x_transform: TRANSFORM,
    y_transform: TRANSFORM,
    window: Optional[Tuple[float, float]] = None
) -> RateFit:
    """Least-squares slope of log y against log x over the converged records with omega in window."""
    fx = resolve_transform(x_transform)
    fy = resolve_transform(y_transform)
    xs, ys = [], []
    for record in records:
        if not record.ok:
            continue
        if window is not None and not (min(window) <= record.omega <= max(window)):
            continue
        x, y = fx(record), fy(record)
        if not (math.isfinite(x) and math.isfinite(y) and x > 0 and y > 0):
            continue
        xs.append(x)
        ys.append(y)
    if len(xs) < 3:
        raise InsufficientDataError(
            '{0} usable records in window {1}'.format(len(xs), window), rule='at least 3 points', module='analysis'
        )
    log_x, log_y = np.log(xs), np.log(ys)
    if np.ptp(log_x) == 0.0:
        raise InsufficientDataError('all abscissae equal {0:g}'.format(xs[0]), rule='nondegenerate abscissa', module='analysis')
    fit = stats.linregress(log_x, log_y)
    r_squared = min(max(float(fit.rvalue) ** 2, 0.0), 1.0)
    return RateFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=r_squared,
        window=(float(min(xs)), float(max(xs))),
        n_points=len(xs)
    )


def threshold_rates(records: Sequence[SweepRecord], lam: float, window=None) -> Tuple[RateFit, RateFit]:
    """Mass and |action| rates against |omega + lambda_0|; 2/(p-1) and (p+1)/(p-1) in theory."""
    gap = omega_gap(lam)
    return fit_rate(records, gap, 'mass', window), fit_rate(records, gap, 'abs_action', window)


def far_rates(records: Sequence[SweepRecord], window=None) -> Tuple[RateFit, RateFit]:
    """Mass and |action| rates against |omega| as omega -> -infinity."""
    return fit_rate(records, 'abs_omega', 'mass', window), fit_rate(records, 'abs_omega', 'abs_action', window)
