"""Yamabe-type equations on weighted finite graphs.

Discrete calculus (Laplacian, p-Laplacian, higher-order gradients), first
eigenvalues and Sobolev constants, admissible function spaces and energies,
and mountain-pass / Nehari solvers with residual and positivity certificates.
"""
from .calculus import (
    OperatorOrder,
    grad_norm,
    gradient_form,
    laplacian,
    lmp_apply,
    m_grad_norm,
    p_laplacian,
)
from .graph import (
    DomainDecomposition,
    WeightedGraph,
    build_graph,
    decompose_domain,
    degree,
    integrate,
    volume,
)
from .spectrum import (
    EigenResult,
    lambda1,
    lambda_mp,
    lambda_mp_V,
    lambda_p,
    lambda_p_V,
    sobolev_constant,
)
from .solvers import (
    SolverConfig,
    SolverReport,
    certify_positivity,
    mountain_pass_solve,
    nehari_solve,
    newton_refine,
    residual,
    solve,
    verify_geometry,
)
from .variational import (
    AdmissibleSpace,
    Nonlinearity,
    Problem,
    build_admissible_space,
    check_hypotheses,
    energy,
    energy_gradient,
    exp_growth,
    norm,
    power,
    tabulated,
)

__version__ = "0.1.0"
