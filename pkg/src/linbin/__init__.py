"""Linear classifiers over mixed data, with discretization and a CV harness.

Quantitative attributes can be binned (equal-width, equal-frequency, or
entropy/MDL) before training; qualitative attributes enter the model natively
through per-(attribute, category) parameters, so no one-hot input expansion
is needed.  Three objectives (softmax negative log-likelihood, L2 hinge,
mean-square error) share five solvers, and the evaluation harness provides
repeated stratified cross-validation, bias-variance decomposition, and
win-draw-loss sign tests.
"""
from ._kernels import BACKEND as KERNEL_BACKEND
from .data import (Attribute, DataError, Dataset, Imputer, NormalizationModel,
                   Schema, binarize_majority, fit_apply_normalization,
                   fit_imputer, fit_normalizer, impute_missing, one_hot_encode,
                   parse_arff, parse_csv, to_arff)
from .discretize import (CutPoints, DiscretizationModel, fit_efd, fit_ewd,
                         fit_mdlp, fit_model)
from .evaluate import (BVResult, ExperimentSpec, FoldResult, TrainedClassifier,
                       WDLRecord, bias_variance, bias_variance_from_tallies,
                       cross_validate, rmse, sign_test, synth_band2d,
                       synth_xor2d, train_classifier, train_model, wdl_compare,
                       zero_one_loss)
from .objectives import (FeatureMatrix, HingeObjective, LinearModel,
                         MseObjective, NllObjective, ObjectiveConfig,
                         ParameterLayout, linear_scores, make_objective,
                         softmax_probs)
from .solvers import (LineSearchError, NumericError, SolverConfig, SolverTrace,
                      cg_steihaug, gradient_descent, lbfgs, line_search,
                      nonlinear_cg, sgd, solve, tron)

__version__ = "0.1.0"
