"""Numerical laboratory for composition operators on weighted Bergman spaces
with doubling radial weights."""

from . import carleson, criteria, geometry, operators, symbols, testfns, weights
from .carleson import PullbackSampler, pullback_box_ratio, vanishing_scan, lemma5_premise
from .criteria import (boundary_limsup, moorhouse_quantity, necessary_conditions,
                       theorem8_bound, theorem12_verdict, theorem15_verdict)
from .geometry import approach_path, mobius, pseudo_disk, radius_chain, rho
from .operators import combo_matrix, composition_matrix, essnorm_proxy, op_norm
from .symbols import (angular_derivative, contact_scan, julia_quotient, parse_symbol,
                      selfmap_validate, taylor_coeffs)
from .testfns import eval_testfn, lemma_d_gap, make_testfn, testfn_norm
from .weights import (box_mass, doubling_check, lambda_shift, moment, omega_hat,
                      parse_weight, std_weight)

__version__ = "0.1.0"
