"""Federated discriminative naive Bayes for discrete data.

All numerics live in the compiled extension; this package only re-exports
its API. Results are bit-identical to the `fedbayes` command line tool for
the same seeds.
"""

from fedbayes._core import (
    UNCAPPED_ITERATIONS,
    Dataset,
    FedbayesError,
    Model,
    __version__,
    derive_seed,
    federate,
    fit,
    fold_complement,
    init_global_weights,
    load_data,
    make_folds,
    minimize,
    partition_clients,
    run_experiment,
)

__all__ = [
    "UNCAPPED_ITERATIONS",
    "Dataset",
    "FedbayesError",
    "Model",
    "__version__",
    "derive_seed",
    "federate",
    "fit",
    "fold_complement",
    "init_global_weights",
    "load_data",
    "make_folds",
    "minimize",
    "partition_clients",
    "run_experiment",
]
