"""Joint assessment of robustness to distributional shift and uncertainty quality."""

from .core import (
    IN_DOMAIN,
    SHIFTED,
    Partition,
    RegressionRecord,
    ShiftTag,
    Trajectory,
    TrajectoryRecord,
    TranslationRecord,
    validate,
    validate_regression_record,
    validate_trajectory_record,
    validate_translation_record,
)
from .evaluate import Report, evaluate
from .regression import UncertaintyMeasureKind, ensemble_mean, mae, per_sample_mse, rmse, uncertainty
from .retention import (
    Ordering,
    RetentionCurve,
    ScoredSample,
    error_retention_curve,
    f1_at,
    f1_auc,
    f1_retention_curve,
    r_auc,
    roc_auc,
)
from .rip import AggOperator, GaussianStep, RipConfig, aggregate, log_prob_trajectory, run_rip, score_matrix
from .synth import SynthSpec, gen_regression, gen_trajectory, gen_trajectory_scenes, gen_translation, generate
from .trajectory import ade, agg_displacement, fde, top1_displacement, weighted_displacement
from .translation import egleu, egleu_error, max_gleu, sentence_gleu

__version__ = "0.1.0"
