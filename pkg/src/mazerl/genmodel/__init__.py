from .forward import (
    ACTION_DIM,
    HIDDEN_DIM,
    LATENT_DIM,
    OBS_SCALARS,
    ForwardModel,
    ForwardState,
    accuracy_nll,
)
from .actor import Actor
from .critic import Critic, make_target, polyak_update
from .curiosity import (
    curiosity_hidden,
    curiosity_hidden_np,
    curiosity_prediction,
    curiosity_prediction_np,
)
from .manifest import model_manifest
from .unroll import Unroll, free_energy, free_energy_from_unroll, unroll
