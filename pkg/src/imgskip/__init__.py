"""First-order solvers for imaging inverse problems with prox-skipping."""

from .errors import DivergenceError, ReferenceRejectedError
from .operators import (
    BlurKernel,
    LinearMap,
    RadonGeometry,
    blur_adjoint,
    blur_forward,
    blur_map,
    block_stack,
    diagonal_map,
    divergence,
    gaussian_kernel,
    grad_forward,
    grad_map,
    identity_map,
    power_method,
    radon_map,
)
from .problems import (
    DualRofProblem,
    TvReconstructionProblem,
    build_dual_rof,
    build_tv_recon,
    build_tv_saddle_implicit,
    objective_tv,
    primal_from_dual,
)
from .phantoms import add_noise, gen_disc_phantom, gen_shapes_phantom
from .proximal import (
    project_ball,
    project_nonneg,
    prox_conjugate,
    prox_l2_fidelity,
    prox_zero,
    shrink_l21,
)
from .skip import SkipConfig, bernoulli_op, optimal_probability, run_pdhgskip1, run_pdhgskip2, run_proxskip
from .solvers import (
    IterationLog,
    ProxProblem,
    RunRecord,
    SaddleProblem,
    SmoothProblem,
    run_aprojgd,
    run_fista,
    run_gd,
    run_pdhg,
    run_pdhg_preconditioned,
    run_pgd,
)
from .tensor import DualField, Image, Sinogram, axpby, dot, norm2, rel_error
from .tv import TvProxState, dual_gap_rof, tv_prox, tv_value

__version__ = "0.1.0"
