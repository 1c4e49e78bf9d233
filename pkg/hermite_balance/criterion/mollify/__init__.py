from .mollify import (
    SuperKernel,
    ante_rec_product,
    build_superkernel,
    bump,
    mollify,
    rate_kk2,
    rate_kk3,
    smoothing_distance,
)
