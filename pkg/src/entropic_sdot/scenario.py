"""JSON scenario files: a density, atoms, an eta grid and solver settings.

Example::

    {
      "name": "fig1a_gaussian",
      "density": {"family": "gaussian", "mean": 0.0, "sigma": 1.0},
      "atoms": {"positions": [-1.0, 1.0], "weights": [0.5, 0.5]},
      "eta": [4, 8, 16, 32, 64, 128, 256, 512, 1024]
    }

Unknown keys are rejected; errors name the offending location, e.g.
``atoms.weights: ...`` or ``line 4, column 7: ...`` for malformed JSON.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .exceptions import ScenarioError
from .measure import QuadratureSpec, make_density
from .problem import Atoms, Problem

__all__ = ["Scenario", "parse_scenario", "load_scenario", "bundled_scenarios", "SCHEMA"]

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_POINT = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}
_POLYGON = {"type": "array", "items": _POINT, "minItems": 3}
_INTERVAL = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}

_FAMILY_PARAMS = {
    "gaussian": ({"mean": _NUMBER, "sigma": _POSITIVE}, []),
    "laplace": ({"mean": _NUMBER, "scale": _POSITIVE}, []),
    "uniform": ({"low": _NUMBER, "high": _NUMBER, "support": _INTERVAL}, []),
    "power_law": ({"exponent": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                   "low": _NUMBER, "high": _NUMBER, "support": _INTERVAL}, ["exponent"]),
    "uniform2d": ({"polygon": _POLYGON}, ["polygon"]),
    "gaussian2d": ({"mean": _POINT,
                    "covariance": {"type": "array", "items": _POINT, "minItems": 2, "maxItems": 2},
                    "polygon": _POLYGON}, ["mean", "covariance", "polygon"]),
}


def _density_schema():
    rules = []
    for family, (props, required) in _FAMILY_PARAMS.items():
        rules.append({
            "if": {"properties": {"family": {"const": family}}},
            "then": {
                "properties": {"family": True, **props},
                "required": required,
                "additionalProperties": False,
            },
        })
    return {
        "type": "object",
        "required": ["family"],
        "properties": {"family": {"enum": sorted(_FAMILY_PARAMS)}},
        "allOf": rules,
    }


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["density", "atoms"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "density": _density_schema(),
        "atoms": {
            "type": "object",
            "required": ["positions"],
            "additionalProperties": False,
            "properties": {
                "positions": {
                    "type": "array",
                    "minItems": 1,
                    "anyOf": [{"items": _NUMBER}, {"items": _POINT}],
                },
                "weights": {"type": "array", "items": _POSITIVE, "minItems": 1},
            },
        },
        "eta": {"type": "array", "items": _POSITIVE, "minItems": 1},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"unregularized": _POSITIVE, "entropic": _POSITIVE},
        },
        "quadrature": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rel_tol": _POSITIVE,
                "abs_tol": _POSITIVE,
                "max_depth": {"type": "integer", "minimum": 1},
                "base_order": {"type": "integer", "minimum": 2},
            },
        },
        "method": {"enum": ["newton", "sinkhorn"]},
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"grid_points": {"type": "integer", "minimum": 2}},
        },
        "output": {"type": "string"},
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@dataclass(eq=False)
class Scenario:
    """A validated scenario. ``problem`` is ready to hand to the solvers."""

    name: str
    problem: Problem
    etas: list
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    unregularized_tol: float = None
    entropic_tol: float = None
    method: str = "newton"
    grid_points: int = 2000
    output: str = None
    description: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def density(self):
        return self.problem.density

    @property
    def atoms(self):
        return self.problem.atoms


def _path(error_path):
    parts = []
    for p in error_path:
        if isinstance(p, int):
            parts.append(f"[{p}]")
        else:
            parts.append(("." if parts else "") + str(p))
    return "".join(parts) or "<root>"


def parse_scenario(text, name=None):
    """Parse and validate a scenario from JSON text.

    Raises
    ------
    ScenarioError
        Malformed JSON (message carries line and column), a schema violation
        (message names the JSON path), or inconsistent values such as
        duplicate atoms or weights that do not sum to one.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, path=f"line {exc.lineno}, column {exc.colno}") from None
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ScenarioError(err.message, path=_path(err.absolute_path))

    dens = dict(doc["density"])
    family = dens.pop("family")
    try:
        density = make_density(family, **dens)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc), path="density") from None

    pos = np.asarray(doc["atoms"]["positions"], dtype=float)
    if pos.ndim == 1:
        pos = pos.reshape(-1, 1)
    weights = doc["atoms"].get("weights")
    if weights is None:
        weights = np.full(len(pos), 1.0 / len(pos))
    try:
        atoms = Atoms(pos, np.asarray(weights, dtype=float))
    except ValueError as exc:
        where = "atoms.positions" if "position" in str(exc) or "dimension" in str(exc) else "atoms.weights"
        raise ScenarioError(str(exc), path=where) from None
    try:
        problem = Problem(density, atoms)
    except ValueError as exc:
        raise ScenarioError(str(exc), path="atoms.positions") from None

    etas = sorted(float(e) for e in doc.get("eta", [2.0**k for k in range(2, 11)]))
    if len(set(etas)) != len(etas):
        raise ScenarioError("eta values must be distinct", path="eta")
    quad = doc.get("quadrature", {})
    try:
        spec = QuadratureSpec(**quad)
    except ValueError as exc:
        raise ScenarioError(str(exc), path="quadrature") from None
    tols = doc.get("tolerances", {})
    return Scenario(
        name=doc.get("name", name or "scenario"),
        problem=problem,
        etas=etas,
        quadrature=spec,
        unregularized_tol=tols.get("unregularized"),
        entropic_tol=tols.get("entropic"),
        method=doc.get("method", "newton"),
        grid_points=doc.get("oracle", {}).get("grid_points", 2000),
        output=doc.get("output"),
        description=doc.get("description", ""),
        raw=doc,
    )


def bundled_scenarios():
    """Names of the scenarios shipped with the package."""
    folder = resources.files(__package__) / "scenarios"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def load_scenario(path_or_name):
    """Load a scenario from a file path, or by bundled name (e.g. ``"fig1a_gaussian"``)."""
    path = Path(path_or_name)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
        name = path.stem
    else:
        res = resources.files(__package__) / "scenarios" / f"{path_or_name}.json"
        if not res.is_file():
            raise ScenarioError(f"no such file or bundled scenario (bundled: {', '.join(bundled_scenarios())})",
                                path=str(path_or_name))
        text = res.read_text(encoding="utf-8")
        name = str(path_or_name)
    try:
        return parse_scenario(text, name=name)
    except ScenarioError as exc:
        raise ScenarioError(f"{path_or_name}: {exc}") from None
