"""
Quantized vortex detection by the discrete phase winding around grid plaquettes.
"""
from typing import List, Tuple
import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, Delaunay, QhullError
from ..grid import Field
from ..util import InvocationDebug

# nodes above this fraction of the peak density make up the bulk
BULK_FRACTION = 1e-6


def wrap_phase(delta: np.ndarray) -> np.ndarray:
    """Map phase differences into [-pi, pi)."""
    return (delta + np.pi) % (2 * np.pi) - np.pi


def plaquette_winding(data: np.ndarray) -> np.ndarray:
    """Integer winding of the phase around each plaquette, counterclockwise in (x_1, x_2).

    ``data`` has axis 0 along x_2 and axis 1 along x_1.
    """
    theta = np.angle(data)
    t00 = theta[:-1, :-1]
    t10 = theta[:-1, 1:]   # x_1 + h
    t11 = theta[1:, 1:]
    t01 = theta[1:, :-1]   # x_2 + h
    total = wrap_phase(t10 - t00) + wrap_phase(t11 - t10) + wrap_phase(t01 - t11) + wrap_phase(t00 - t01)
    return np.rint(total / (2 * np.pi)).astype(int)


def _bulk_hull(phi: Field, density: np.ndarray, peak: float):
    x1 = phi.grid.coordinates(0).cpu().numpy()
    x2 = phi.grid.coordinates(1).cpu().numpy()
    rows, cols = np.nonzero(density > BULK_FRACTION * peak)
    if rows.size < 3:
        return None
    points = np.column_stack([x1[cols], x2[rows]])
    try:
        hull = ConvexHull(points)
        return Delaunay(points[hull.vertices])
    except QhullError:
        # collinear bulk
        return None


@InvocationDebug('analysis.count_vortices')
def count_vortices(phi: Field, density_floor_frac: float = 0.5) -> Tuple[int, List[Tuple[float, float]]]:
    """Number and (x_1, x_2) locations of vortices; d=1 fields have none.

    A plaquette counts when |winding| >= 1, its four corner densities are below
    density_floor_frac * max|phi|^2 and its centre lies in the convex hull of the bulk.
    Adjacent hits merge into one vortex.
    """
    if phi.grid.dim != 2:
        return 0, []
    data = phi.numpy()
    density = np.abs(data) ** 2
    peak = float(density.max())
    if peak == 0.0:
        return 0, []
    winding = plaquette_winding(data)
    floor = density_floor_frac * peak
    low = (
        (density[:-1, :-1] < floor) & (density[:-1, 1:] < floor) &
        (density[1:, 1:] < floor) & (density[1:, :-1] < floor)
    )
    hits = (np.abs(winding) >= 1) & low
    if not hits.any():
        return 0, []
    hull = _bulk_hull(phi, density, peak)
    if hull is None:
        return 0, []
    h1, h2 = phi.grid.spacing
    x1 = phi.grid.coordinates(0).cpu().numpy()[:-1] + 0.5 * h1
    x2 = phi.grid.coordinates(1).cpu().numpy()[:-1] + 0.5 * h2
    rows, cols = np.nonzero(hits)
    centres = np.column_stack([x1[cols], x2[rows]])
    inside = hull.find_simplex(centres) >= 0
    hits = np.zeros_like(hits)
    hits[rows[inside], cols[inside]] = True
    labels, count = ndimage.label(hits, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return 0, []
    centroids = ndimage.center_of_mass(hits, labels, range(1, count + 1))
    lo1, lo2 = phi.grid.bounds[0][0], phi.grid.bounds[1][0]
    locations = [(lo1 + (c + 0.5) * h1, lo2 + (r + 0.5) * h2) for r, c in centroids]
    return count, locations
