"""Explainable neural networks built on the additive index model.

The model is a structured network f(x) = mu + sum_k gammas[k] * h_k(betas[k] @ x):
a linear projection layer feeds K isolated scalar-in/scalar-out subnetworks
whose outputs are linearly recombined.  L1 shrinkage on the projection and
combination weights yields a sparse, directly readable decomposition of the
fitted surface into ridge functions.
"""
from xnn.data import (
    Dataset,
    StandardizationParams,
    load_dataset,
    save_dataset,
    standardize_fit,
)
from xnn.errors import (
    ModelParseError,
    NumericDivergenceError,
    ValidationError,
    XnnError,
)
from xnn.explain import (
    ConditionalEffectProfile,
    InteractionSignature,
    RidgeProfile,
    SparsityReport,
    active_subnets,
    conditional_effects,
    interaction_signature,
    ridge_profiles,
    sparsity_report,
    write_explain_metadata,
    write_profiles_csv,
)
from xnn.model import (
    DenseLayer,
    Gradients,
    Subnetwork,
    XnnConfig,
    XnnModel,
    eval_subnet,
    forward,
    gradient,
    init_model,
    input_partials,
    predict_batch,
    validate_model,
)
from xnn.rng import SeededRng
from xnn.serialize import load_model, save_model
from xnn.simulate import (
    gen_interaction,
    gen_legendre,
    gen_nonlinear,
    interaction_signal,
    legendre,
    legendre_signal,
    nonlinear_signal,
    quad_identity,
)
from xnn.surrogate import FidelityReport, distill
from xnn.training import (
    AdamState,
    FitReport,
    TrainConfig,
    fit,
    l1_proximal_step,
    train_step,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ConditionalEffectProfile",
    "Dataset",
    "DenseLayer",
    "FidelityReport",
    "FitReport",
    "Gradients",
    "InteractionSignature",
    "ModelParseError",
    "NumericDivergenceError",
    "RidgeProfile",
    "SeededRng",
    "SparsityReport",
    "StandardizationParams",
    "Subnetwork",
    "TrainConfig",
    "ValidationError",
    "XnnConfig",
    "XnnError",
    "XnnModel",
    "active_subnets",
    "conditional_effects",
    "distill",
    "eval_subnet",
    "fit",
    "forward",
    "gen_interaction",
    "gen_legendre",
    "gen_nonlinear",
    "gradient",
    "init_model",
    "input_partials",
    "interaction_signal",
    "interaction_signature",
    "l1_proximal_step",
    "legendre",
    "legendre_signal",
    "load_dataset",
    "load_model",
    "nonlinear_signal",
    "predict_batch",
    "quad_identity",
    "ridge_profiles",
    "save_dataset",
    "save_model",
    "sparsity_report",
    "standardize_fit",
    "train_step",
    "validate_model",
    "write_explain_metadata",
    "write_profiles_csv",
]
