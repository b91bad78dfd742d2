"""Nonlinear Embedding Transform (NET) for unsupervised domain adaptation.

Data matrices are ``d x n`` with one point per column; source columns come
before target columns wherever the two are stacked.
"""
from .classify import accuracy, one_nn_predict
from .kernel import KernelSpec, gram
from .selection import KmmConfig, ParamGrid, grid_search, kmm_weights, select_validation
from .solver import HyperParams, ProjectionResult, jda_fit, kpca_fit, net_fit, tca_fit

__all__ = [
    "HyperParams",
    "KernelSpec",
    "KmmConfig",
    "ParamGrid",
    "ProjectionResult",
    "accuracy",
    "gram",
    "grid_search",
    "jda_fit",
    "kmm_weights",
    "kpca_fit",
    "net_fit",
    "one_nn_predict",
    "select_validation",
    "tca_fit",
]
