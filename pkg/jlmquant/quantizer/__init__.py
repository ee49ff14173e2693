"""Quantization of Noether symmetries into linear second-order equations."""

from .determining import (
    DeterminingSystem,
    is_pde_symmetry,
    pde_symmetry_from_point,
    pde_symmetry_residual,
    solve_determining,
    solve_multipliers,
)
from .reduction import (
    characteristic_coordinate,
    classify,
    solve_euler,
    to_normal_form,
    trivial_symmetry_check,
    verify_solution,
)

__all__ = [
    "DeterminingSystem",
    "characteristic_coordinate",
    "classify",
    "is_pde_symmetry",
    "pde_symmetry_from_point",
    "pde_symmetry_residual",
    "solve_determining",
    "solve_euler",
    "solve_multipliers",
    "to_normal_form",
    "trivial_symmetry_check",
    "verify_solution",
]
