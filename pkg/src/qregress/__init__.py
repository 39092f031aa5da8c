"""Variational regression of quantum-state labels with Fisher-information diagnostics."""
from .analytic import OperatorEquationProblem, solve_optimal_observable
from .ansatz import AnsatzSpec, build_unitary, param_count
from .datagen import TrainingSet, build_training_set, make_family
from .metrology import cfi, fisher_report, qfi, sld
from .observable import CircuitMeasurement, ObservableSpec
from .regression import CostWeights, TrainConfig, TrainedModel, evaluate, predict, train, train_bayes

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec", "CircuitMeasurement", "CostWeights", "ObservableSpec", "OperatorEquationProblem", "TrainConfig",
    "TrainedModel", "TrainingSet", "build_training_set", "build_unitary", "cfi", "evaluate", "fisher_report",
    "make_family", "param_count", "predict", "qfi", "sld", "solve_optimal_observable", "train", "train_bayes",
]
