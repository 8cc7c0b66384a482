"""Problem families reduced to the canonical engine, plus reference oracles."""
from .bqp import BooleanQPSpec, bqp_big_input_rule, build_boolean_qp, random_bqp, solve_bqp_second_dual
from .double_well import DoubleWellSpec, build_double_well, solve_double_well_analytic
from .maxcut import MaxCutSpec, build_max_cut, cut_value, random_graph
from .oracles import brute_force_binary
from .distance_geometry import DistanceGeometrySpec, build_distance_geometry, positions, stress
from .dynamics import DynamicsSpec, build_dynamics_least_squares, full_trajectory, least_squares_energy
from .two_surface import TwoSurfaceSpec, build_two_surface, polar_grid_oracle, solve_two_surface
