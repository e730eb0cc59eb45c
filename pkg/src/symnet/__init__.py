"""Symmetry-based construction, initialization and SGD training of one-hidden-layer
networks for symmetric Boolean functions."""
from .network import (
    Embedding,
    TwoLayerNetwork,
    embed,
    forward,
    initial_embedding_classes,
    predict,
    random_init,
    symmetric_init,
)
from .perceptron import (
    LabeledPointSet,
    PerceptronResult,
    SeparatorCertificate,
    lemma3_certificate,
    margin_of,
    run_modified_perceptron,
    theorem2_bounds,
)
from .reprbuild import build_relu_net, build_sigmoid_net, verify_repr
from .rng import make_rng
from .symfun import (
    Dataset,
    SymmetricFunction,
    flip_labels,
    hamming_weight,
    majority_support,
    parity_support,
    perturb_inputs,
    random_symfun,
    sample_dataset,
)
from .trainer import TrainConfig, TrainTrace, hinge_loss, sgd_update, train

__version__ = "0.1.0"
