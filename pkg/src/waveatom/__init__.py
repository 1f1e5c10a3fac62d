"""Wave atom compression of Helmholtz boundary integral kernels."""

from .geometry import Curve, SHAPES, load_curve, make_ellipse, make_kite, make_star, save_curve
from .kernels import DenseKernel, assemble, assemble_combined, assemble_double, assemble_single, default_size
from .nsform import (
    SparseNSForm,
    SparsityReport,
    analyze,
    compress,
    estimate_l2_error,
    load_nsf,
    save_nsf,
    sparsity_pattern,
)
from .solver import IncidentWave, bistatic_rcs, far_field, scattered_field, solve_bie
from .special import hankel1, hankel1_scaled
from .transform import (
    Tiling,
    adjoint1d,
    adjoint2d,
    build_tiling,
    forward1d,
    forward1d_extended,
    forward2d,
)

__version__ = "0.1.0"
