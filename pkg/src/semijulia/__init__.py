"""Julia sets of postcritically bounded polynomial semigroups.

Raster computation (survivor iteration, chaos game, word-union rendering),
surrounding-order topology of the component lattice, the explicit example
constructions, and an executable verification harness for the structural
theorems they realize.
"""

from .errors import (AnchorError, ConfigError, ConstructionError, DynamicsError,
                     InvalidIndexError, RasterError, ResourceBudgetError,
                     RootSolveError, StructureError)
from .grid import GridSpec, RasterSet, annulus_raster, circle_raster, disk_raster
from .poly import (Escaped, Polynomial, Value, critical_points, eval_word,
                   leading_capacity, monomial, monomial_iterate, preimages)
from .semigroup import (Bounded, Escapes, Generator, GeneratorSet,
                        PostcriticalSample, postcritical_bounded_check,
                        smallest_filled_julia)
from .rasterdyn import (default_survivor_seed, fiberwise_filled,
                        generator_julia_rasters, hausdorff_px, julia_chaos,
                        julia_survivor, julia_word_union, preimage_raster,
                        word_filled_raster)
from .topology import (ComponentLabels, FatouClass, OrderVerdict, Relation,
                       classify_fatou_components, containment_report,
                       find_jmin_jmax, g_star, jordan_test, label_components,
                       order_components, polynomial_hull_raster,
                       surrounding_compare)
from .constructions import (ConstructionResult, cantor_circles,
                            figure1_semigroup, hmin_not, k_components,
                            nothyp_pair, replay)
from .verify import (Report, check_fiberwise_cantor, check_hyperbolic,
                     check_invariance, check_structure, check_triangulation,
                     run_suite)

__version__ = "0.1.0"
