"""Tikhonov regularization in Hilbert scales for nonlinear Volterra problems on [0, 1]."""

from .experiments import (APrioriRule, DiscrepancyRule, RateStudyRecord, add_noise,
                          fit_power_law, read_records, run_rate_study, summarize, write_records)
from .grid import inner, integration_matrix, nodes, norm, trapezoid_weights
from .operators import Autoconvolution, ExpGrowth, OperatorOverflow, make_operator
from .parameter import DiscrepancyConfig, DiscrepancyError, a_priori_alpha, discrepancy_select
from .scales import build_basis, scale_norm, sobolev_norm
from .solutions import SolutionSpec, make_solution
from .tikhonov import (HilbertScalePenalty, SobolevPenalty, TikhonovProblem, auxiliary_minimize,
                       minimize, verify_lemma_bounds)

__version__ = "0.1.0"
