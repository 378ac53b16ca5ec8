from .tensor import (
    ConfigurationError,
    DiffcoreError,
    NumericError,
    Tensor,
    UsageError,
    add,
    avg_pool3x3_s2,
    backward,
    concat,
    conv1x1,
    conv3x3_reflect,
    conv3x3_reflect_prelu,
    div,
    exp,
    grad_enabled,
    gru_step,
    linear,
    linear_prelu,
    log,
    matmul,
    mean_axis,
    minimum,
    mul,
    narrow0,
    no_grad,
    prelu,
    reshape,
    sigmoid,
    softplus,
    scatter_rows,
    square,
    sub,
    sum_axis,
    take_rows,
    tanh,
    tmean,
    tsum,
    upsample_bilinear2x,
)
from .optim import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, ParamSet, adam_step, fanin_uniform
from .gaussian import (
    STD_FLOOR,
    GaussianParams,
    diag_gaussian_kl,
    kl_np,
    reparam_sample,
    tanh_gaussian_logprob,
    tanh_gaussian_logprob_np,
)
from .checkpoint import load_arrays, load_params, save_arrays, save_params
