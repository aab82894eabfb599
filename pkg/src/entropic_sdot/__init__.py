"""Semi-discrete optimal transport with and without entropic regularization.

Solvers for the power-cell (unregularized) problem and its entropic
counterpart, large-eta predictions of the suboptimality and entropic cost,
a dense brute-force oracle, and a scenario-driven CLI.
"""

__version__ = "0.1.0"

from .asymptotics import (
    Prediction,
    case_study_subopt,
    fit_rate,
    predict,
    predict_subopt_constant,
    predicted_entropic_cost,
    run_sweep,
)
from .entropic import (
    DiagnosticsRow,
    EntropicSolution,
    conditional,
    cost,
    diagnostics,
    dual_gap,
    kl_and_entropic_cost,
    phi,
    sinkhorn_solve,
    soft_potential,
    suboptimality,
)
from .estimators import EntropicSemiDiscreteOT, SemiDiscreteOT
from .exceptions import ConsistencyError, ConvergenceError, QuadratureError, ScenarioError
from .measure import QuadratureSpec, make_density
from .oracle import DiscreteProblem, dense_sinkhorn, discretize
from .powercell import PowerDiagram, build_diagram, cell_masses, facet_weight, facet_weights, slack
from .problem import Atoms, Problem, entropy
from .scenario import Scenario, load_scenario, parse_scenario
from .sdot import DualSolution, solve_quantile_1d, solve_unregularized, transport_map, w2_squared
from .specialfn import dilog, zeta2

__all__ = [
    "Atoms", "ConsistencyError", "ConvergenceError", "DiagnosticsRow", "DiscreteProblem",
    "DualSolution", "EntropicSemiDiscreteOT", "EntropicSolution", "PowerDiagram", "Prediction",
    "Problem", "QuadratureError", "QuadratureSpec", "Scenario", "ScenarioError", "SemiDiscreteOT",
    "build_diagram", "case_study_subopt", "cell_masses", "conditional", "cost", "dense_sinkhorn",
    "diagnostics", "dilog", "discretize", "dual_gap", "entropy", "facet_weight", "facet_weights",
    "fit_rate", "kl_and_entropic_cost", "load_scenario", "make_density", "parse_scenario", "phi",
    "predict", "predict_subopt_constant", "predicted_entropic_cost", "run_sweep", "sinkhorn_solve",
    "slack", "soft_potential", "solve_quantile_1d", "solve_unregularized", "suboptimality",
    "transport_map", "w2_squared", "zeta2",
]
