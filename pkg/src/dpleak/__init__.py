"""Membership inference against the Laplace mechanism through the linear
property of queries: defender, attacker and success-rate analysis."""
from dpleak._backend import BACKEND
from dpleak.analysis import (
    RateSpec,
    empirical_success_rate,
    power_terms,
    success_rate,
    success_rate_exact,
    success_rate_per_query,
    success_rate_total,
)
from dpleak.attack import (
    AbortDetected,
    AttackConfig,
    ConfigError,
    Decision,
    InsufficientKnowledge,
    Verdict,
    attack,
    classify_case,
    harvest_samples,
)
from dpleak.core import (
    Condition,
    DataFormatError,
    Dataset,
    LinearQuery,
    Record,
    apply_condition,
    eval_query,
    load_jsonl,
    sensitivity,
)
from dpleak.mechanism import (
    ABORTED,
    Aborted,
    Answer,
    Mechanism,
    attacker_view_consumed,
    new_mechanism,
)
from dpleak.stats import (
    DegenerateSample,
    NonConvergence,
    TTestResult,
    integrate,
    one_sample_t_test,
    sample_laplace,
    t_cdf,
    t_pdf,
    t_quantile,
)

__version__ = "0.1.0"
