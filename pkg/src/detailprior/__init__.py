"""Log-domain detail-layer extraction, enhancement and SR pair preparation."""

from detailprior.image_core import (
    bicubic_resize,
    load_image,
    mod_crop,
    read_dpln,
    rgb_to_ycbcr,
    save_image,
    write_dpln,
    ycbcr_to_rgb,
)
from detailprior.solver import (
    FidelityWeights,
    SolverParams,
    VectorField,
    build_vector_field,
    fidelity_weights,
    lambda_schedule,
    objective_value,
    psi,
    solve_dense,
    solve_fast,
    solve_line,
)
from detailprior.prior import (
    DetailLayer,
    EnhancementConfig,
    base_layer,
    enhance,
    extract_detail,
    extract_detail_exact,
)
from detailprior.baselines import (
    AdditiveDecomposition,
    additive_decompose,
    additive_merge,
    guided_filter,
    wls_smooth,
)
from detailprior.metrics import SparsityStats, psnr, sparsity_stats, ssim
from detailprior.dataset import PairManifest, degrade, prepare_pairs

__version__ = "0.1.0"
