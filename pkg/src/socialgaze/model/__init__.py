from .interaction import InteractionModule, ViTTokenizer, block_layer_ranges
from .layers import Attention, ResidualMLP, TransformerLayer
from .network import ModelOutput, SocialGazeNet, build_model
from .person import (
    GazeVectorHead,
    PersonModule,
    PersonTokenizer,
    ResNet18Backbone,
    TemporalGazeEncoder,
    ToyBackbone,
)
from .prediction import ConditionedDPT, MultiScaleToken, SocialHeads, laeo_from_lah

__all__ = [
    "Attention",
    "ConditionedDPT",
    "GazeVectorHead",
    "InteractionModule",
    "ModelOutput",
    "MultiScaleToken",
    "PersonModule",
    "PersonTokenizer",
    "ResNet18Backbone",
    "ResidualMLP",
    "SocialGazeNet",
    "SocialHeads",
    "TemporalGazeEncoder",
    "ToyBackbone",
    "TransformerLayer",
    "ViTTokenizer",
    "block_layer_ranges",
    "build_model",
    "laeo_from_lah",
]
