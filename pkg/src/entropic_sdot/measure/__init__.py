"""Source densities and the adaptive quadrature used to integrate against them."""

from .densities import (
    FAMILIES,
    Density,
    Gaussian,
    Gaussian2D,
    Laplace,
    PowerLaw,
    Uniform,
    Uniform2D,
    eval_density,
    make_density,
)
from .quadrature import (
    QuadratureSpec,
    Rule,
    integrate_1d,
    integrate_polygon,
    integrate_segment,
    refinement_grid,
    rule_1d,
    rule_polygon,
)

__all__ = [
    "FAMILIES", "Density", "Gaussian", "Gaussian2D", "Laplace", "PowerLaw", "Uniform",
    "Uniform2D", "eval_density", "make_density", "QuadratureSpec", "Rule", "integrate_1d",
    "integrate_polygon", "integrate_segment", "refinement_grid", "rule_1d", "rule_polygon",
]
