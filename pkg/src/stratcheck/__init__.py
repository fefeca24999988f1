"""Model checker for coalition abilities under imperfect information in
asynchronous multi-agent systems: explicit global models, partial-order
reduction, bisimulation checking, and uniform-strategy synthesis."""

from .spec_lang import parse_spec, parse_formula, parse_relation, validate, pretty
from .model import (
    build_global_model,
    enabled_global_actions,
    apply_action,
    epistemic_class,
    coalition_neighborhood,
    export_graph,
)

__version__ = "0.1.0"

__all__ = [
    "parse_spec", "parse_formula", "parse_relation", "validate", "pretty",
    "build_global_model", "enabled_global_actions", "apply_action",
    "epistemic_class", "coalition_neighborhood", "export_graph",
    "__version__",
]
