"""Small-n criteria: the K integral, A~ sums, the criterion sum and sufficient conditions."""
from .conditions import ConditionCheck, ConditionsReport, LevyMeasure, Status, check_sufficient_conditions, omega_shell
from .criterion import CriterionConfig, CriterionReport, Verdict, criterion_sum, sup_grid
from .kintegral import K_METHODS, K_integral
from .sums import ATilde, A_tilde, kappa, norming_values
from .trend import SlopeFit, ols_slope, theil_sen_slope

__all__ = [
    "ATilde",
    "A_tilde",
    "ConditionCheck",
    "ConditionsReport",
    "CriterionConfig",
    "CriterionReport",
    "K_METHODS",
    "K_integral",
    "LevyMeasure",
    "SlopeFit",
    "Status",
    "Verdict",
    "check_sufficient_conditions",
    "criterion_sum",
    "kappa",
    "norming_values",
    "ols_slope",
    "omega_shell",
    "sup_grid",
    "theil_sen_slope",
]
