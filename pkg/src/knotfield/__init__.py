"""Electrostatics of charged loops: fields, equilibria, and level-set topology.

The package computes, for a uniformly charged closed curve (planar shapes
or knots), the potential and field it generates, the complete set of field
zeros with Morse indices, equipotential surfaces with their genus, the
pitchfork thresholds of elongating planar loops, and flattening sweeps
that track how the zeros of a knot coalesce.
"""

from .critical import (CriticalPoint, NewtonRejection, SeedingConfig,
                       find_critical_set, morse_code, newton_refine,
                       seed_dense_grid, seed_marching_cubes,
                       strand_clearance)
from .curves import (ChargeDiscretization, KnotInfo, KNOT_TABLE, ParamCurve,
                     discretize, load_curve_csv, make_curve, point_charge)
from .errors import (CatalogError, EmptyCriticalSetError, KnotfieldError,
                     MeshDefectError, NonRegularValueError, ParameterError,
                     SingularityError)
from .fieldkernel import (FieldEval, evaluate, far_field_check, field, field_batch,
                    field_grid, hessian, hessian_batch, potential,
                    potential_batch, potential_grid)
from .isosurface import (TopologyReport, TriMesh, extract_isosurface,
                         morse_transition_gallery, save_obj, topology)
from .planar import (AxisProfile, BifurcationResult, axis_profile,
                     ellipse_d2phi_origin, planar_critical_points,
                     rectangle_potential, rectangle_threshold,
                     stadium_potential_on_axis, stadium_threshold)
from .sweep import (SweepRecord, SweepResult, conjecture_table,
                    flatten_sweep, write_sweep_csv)

__version__ = "0.1.0"
