"""Randomized and progressively sampled sketching for rank-r Tucker
decompositions of order-3 tensors.
"""
from .bench import (LearningCurveRecord, SyntheticSpec, comparison_table, generate,
                    learning_curve, space_to_target)
from .linalg import (gaussian_map, leading_left_singular_vectors, pseudo_inverse,
                     qr_thin, singular_values_sq)
from .progressive import (ProgressTrace, SamplerState, allocate, draw_ratios,
                          latent_variance_entropy, psct, psct_permute, sad,
                          sad_entropy, update_weights, weighted_sample)
from .sct import (BudgetError, SampleLog, SketchBudget, SketchError, rsct_baseline,
                  sct, step3_schedule)
from .tensor import (as_tensor, fold, frobenius_norm_sq, intersect, mode_product,
                     slice_, unfold)
from .tucker import TuckerDecomposition, hosvd, reconstruct, relative_error, scree

__version__ = "0.1.0"
