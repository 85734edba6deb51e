"""Quasi-Hamiltonian spaces: building blocks, fusion, axiom checks, assembly, fibers and reduction."""

from .assemble import assemble_moduli, describe, point_from_representation, representation_from_point
from .axioms import AxiomReport, check_qh_axioms, d_omega, d_omega_fd, eta_pullback, qh3_check
from .catalog import double_double, space_from_name
from .fiber import FiberResult, solve_moment_fiber
from .forms import cartan_eta, pairing
from .reduction import ReductionError, ReductionReport, reduction_report
from .spaces import (
    Block,
    QHSpace,
    Slot,
    SpaceError,
    double,
    extrinsic_fuse,
    fuse,
    fused_double,
    gram_by_entries,
    point_space,
    product,
    rename,
    vdb_space,
)
