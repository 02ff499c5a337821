"""Symmetry-structured 2D convolutions with exact custom backpropagation.

The package provides convolution kernels whose packed parameterizations
generate or preserve spatially symmetric feature maps, triangle-only storage
and inference for those maps, reference oracles, and a small deterministic
training harness with a CLI.
"""

from .cartesian import pair_swap_check, self_cartesian
from .conv import (
    Conv2dKernel,
    ConvGrads,
    conv2d_backward,
    conv2d_forward,
    relu_backward,
    relu_forward,
    sigmoid_backward,
    sigmoid_forward,
    upper_triangle_mask,
    weighted_bce_upper,
)
from .errors import (
    ConfigError,
    DomainError,
    OracleError,
    PreconditionError,
    ShapeError,
    SymconvError,
    TrainingError,
)
from .harness import (
    AdamState,
    ComparisonReport,
    Dataset,
    LayerSpec,
    NetworkConfig,
    StructureMetrics,
    TaskConfig,
    TrainResult,
    adam_step,
    compare_cnn_scnn,
    complement_rule,
    count_parameters,
    decode_pairs,
    evaluate,
    forward_network,
    gen_synthetic_pairing,
    init_network,
    load_config,
    make_dataset,
    sgd_step,
    standard_twin,
    train,
)
from .oracle import (
    FdSpec,
    brute_force_expand_count,
    fd_gradient,
    naive_conv2d,
    relative_error,
    worst_relative_error,
)
from .packed import (
    OpMeter,
    PackedSymFeature,
    load_packed,
    pack,
    packed_sym_conv,
    packed_sym_gen_conv,
    save_packed,
    storage_ratio,
    unpack,
)
from .symkernel import (
    SymGenKernel,
    SymPresKernel,
    expand_gen,
    expand_pres,
    fold_gen_grad,
    fold_pres_grad,
    init_glorot,
    init_half_glorot,
    load_kernel,
    new_gen_kernel,
    new_pres_kernel,
    save_kernel,
    sym_gen_layer_forward,
    sym_layer_backward,
    sym_pres_layer_forward,
    tri_count,
    tri_index,
)
from .tensor import (
    Rng,
    as_tensor,
    asymmetry,
    load_tensor,
    max_abs_diff,
    save_tensor,
    transpose_spatial,
    zeros,
)

__version__ = "0.1.0"
