from .branch import Counter, birkhoff_random_average, branch_average_exact, branch_totals
from .lyapunov import branch_average_mc, ergodic_average_path, lambda_fixed
from .observables import ObservableSequence
from .report import EstimatorReport, Verdict, judge
from .subadditivity import (KingmanReport, SubadditivityReport, Violation, check_subadditivity,
                            default_panel, fekete_limit, kingman_diagnostic)

__all__ = [
    "Counter", "EstimatorReport", "KingmanReport", "ObservableSequence", "SubadditivityReport",
    "Verdict", "Violation", "birkhoff_random_average", "branch_average_exact", "branch_average_mc",
    "branch_totals", "check_subadditivity", "default_panel", "ergodic_average_path",
    "fekete_limit", "judge", "kingman_diagnostic", "lambda_fixed",
]
