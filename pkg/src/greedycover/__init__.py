"""Greedy move-toward-violator algorithms for approximate minimum enclosing shapes."""

from .coreset import CoreSet, certify_coreset, extract_coreset
from .meb import BallState, meb_binary_search, meb_fixed_radius, mebopt
from .mincon import mincon_fixed_scale, mincon_scale_search, mincon_union
from .mincyn import CylinderState, mincyn_init, mincyn_radius_search, mincyn_solve, mincyn_step
from .rotation import AxisState, HalfSpaceConstraint, fullrot, minrot
from .shapes import AngularProfile, Ball, Box, Ellipsoid, UnionShape, VertexHull, make_shape
from .trace import ConvergenceTrace, Status

__version__ = "0.1.0"
