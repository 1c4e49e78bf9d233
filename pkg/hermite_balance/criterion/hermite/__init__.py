from .hermite import (
    CutoffA,
    DyadicBlockSet,
    block_convolve,
    block_kernel,
    build_blocks,
    eigen_check,
    hermite_h,
    hermite_table,
    hermite_transform,
    iter_hermite,
    iter_hermite_derivative,
    kernel_bound_ratio,
    orthonormality_defect,
    ratio_trend,
    reconstruct,
    reconstruction_residuals,
    reconstruction_weights,
    regularize,
    synthesize,
)
