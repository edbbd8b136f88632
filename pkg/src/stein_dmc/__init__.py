"""Stein exponents of distributed detection over discrete memoryless channels."""

from .channel_analysis import (
    ConnectivityReport,
    Triple,
    best_binary_relay_exponent,
    check_useless_communication_condition,
    classify,
    gamma_min,
    gamma_quotient,
)
from .config import ProblemConfig
from .errors import (
    AbsoluteContinuityViolation,
    DegenerateChannel,
    InfeasibleTargets,
    InsufficientData,
    NonConvergence,
    NotFullyConnected,
    RegimeMismatch,
    ResourceLimit,
    ScheduleViolation,
    SteinDmcError,
    SupportAssumptionViolation,
    ValidationError,
)
from .evaluation import CostAudit, EvaluationResult, ExponentFit, audit_cost, evaluate_exact, fit_exponent, simulate
from .exponents import (
    ChannelCase,
    ExponentReport,
    compute_E1,
    compute_E2,
    compute_E3,
    i_projection,
    local_exponent,
    regime_exponent,
    resolve_exponents,
)
from .prob_core import CostFunction, Dmc, JointPmf, Pmf, kl_divergence, marginals, validate_problem
from .schemes import (
    Mode,
    Regime,
    Schedule,
    ScheduleKind,
    Schedules,
    SchemeInstance,
    decide,
    encode,
    finite_k_feasibility,
    resolve_instance,
)
from .typicality import EmpiricalType, TypicalityParams, is_strongly_typical, typicality_event_probability

__version__ = "0.1.0"
