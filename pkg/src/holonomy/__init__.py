"""Parallel transport of U(1) bundles and surface transport of gerbes.

Both are computed as state sums over partitions of the parameter domain
whose pieces are labeled by the charts of a cover, from Cech data: transition
functions and local connection forms.
"""

from .axioms import AxiomReport, axiom_suite_1d, axiom_suite_2d
from .bundle import (StokesReport, TransportFunctor, broken_bundle_functor, bundle_functor, glue_z_path,
                     reconstruct_A, reconstruct_bundle, reconstruct_g, stokes_check_1d, z_loop_from_bundle,
                     z_path_from_bundle, z_point_from_bundle)
from .catalog import CATALOG, CatalogEntry, get_entry
from .cech import (BundleData, Chart, ChartCover, CocycleReport, GerbeData, bundle_curvature,
                   check_bundle_cocycle, check_gerbe_cocycle, gerbe_curvature)
from .errors import GeometryError, HolonomyError, NumericalError
from .gerbe import (GerbeFunctor, LoopTransition, SurfaceObject, broken_gerbe_functor, gerbe_functor,
                    glue_z_surface, partial_glue_z_surface, reconstruct_A2, reconstruct_F, reconstruct_g3,
                    reconstruct_gerbe, stokes_check_2d, z_loop_transition, z_surface)
from .numerics import DEFAULT_QUAD, QuadConfig
from .phase import Phase, wrap_angle

__version__ = "0.1.0"
