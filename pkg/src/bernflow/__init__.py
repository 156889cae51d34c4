"""Bernstein-basis normalizing flows with exact likelihoods."""

from .bernstein import (
    BernsteinPoly,
    Interval,
    PowerPoly,
    basis_at,
    bernstein_operator,
    derivative,
    from_power_basis,
    to_power_basis,
)
from .conditioning import (
    ConditionReport,
    perturb_coefficients,
    root_condition_number,
    value_condition_number,
)
from .data import (
    Dataset,
    FIVE_GAUSSIANS,
    MixtureSpec1D,
    SEVEN_GAUSSIANS,
    add_uniform_noise,
    gaussian_mixture_1d,
    load_csv,
    rescale_to_box,
    toy2d,
)
from .flow import (
    FlowLayer,
    FlowModel,
    TargetDiffeo,
    affine_diffeo,
    build_flow,
    forward,
    identity_diffeo,
    inverse,
    layer_forward,
    layer_inverse,
    load_checkpoint,
    log_density,
    sample,
    save_checkpoint,
    tanh_diffeo,
)
from .monotone import (
    MonotoneParams,
    check_strictly_increasing,
    parameterization_jacobian,
    to_coefficients,
)
from .priors import PriorSpec, prior_log_density, prior_sample
from .rootfind import RootConfig, invert_monotone, root_bracket_check
from .training import (
    TrainConfig,
    TrainHistory,
    adam_step,
    finite_difference_audit,
    nll_and_gradients,
    train,
)

__version__ = "0.1.0"
