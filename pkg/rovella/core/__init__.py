from .cuspmap import FlowParams, CuspMapSpec, PLFullBranchMap, rovella_map, rovella_map_from_flow
from .flow import RoofFunction, ConstantRoof, simulate
from .pressure import PressureCurve, PressureDomain, pressure_curve, exponent_bounds, admissible_t_range
from .measure import MeasureApprox, equilibrium_measure
from .spectrum import SpectrumCurve, lyapunov_spectrum_interval, lyapunov_spectrum_flow
from .lift import SquareMeasureApprox, SuspensionMeasure, FlowPotential, lift_to_square, flow_equilibrium
