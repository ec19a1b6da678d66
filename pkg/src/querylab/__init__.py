"""Numerical laboratory for the matrix-vector product query model."""
from .errors import *  # noqa: F401,F403
from .oracle import (
    LinSysInstance,
    QueryLedger,
    QueryOracle,
    ShiftedOracle,
    gram_schmidt,
    make_oracle,
    query,
    query_count,
    white_box,
)
from .spectral import QuadraticProblem, Spectrum, SymmetricMatrix, cond, eig_sym, eigvals_sym, gap, suboptimality
from .wishart import (
    GoodEventParams,
    HardInstance,
    WishartSample,
    build_hard_instance,
    calibrate,
    check_class_membership,
    check_good_event,
    lambda_min_estimator_from_eig,
    limiting_edge_law,
    sample_limiting,
    sample_wishart,
)
from .solvers import (
    ShiftParams,
    SolverOutcome,
    boost_restarts,
    bootstrap_solve,
    conjugate_gradient,
    lanczos,
    power_method,
    shift_invert_eig,
    shift_oracle,
)
from .lemmas import build_rotations, corner_witness, extract_corner, ks_one_sample, ks_two_sample

__version__ = "0.1.0"
