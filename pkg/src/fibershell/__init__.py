"""Rotation-free isogeometric Kirchhoff-Love shells with embedded fiber families."""

from .element import LoadSpec
from .kinematics import CircumferentialFiber, ConstantFiber
from .materials import (SimpleFabric, SimpleFabricParams, StabilizationParams, WovenFabric, WovenFabricParams,
                        graded_bulk_modulus)
from .nurbs import NurbsPatch, build_quarter_annulus, build_rect_patch
from .solver import Dirichlet, Model, NewtonSettings, linear_map, newton_solve, rigid_rotation, run_steps

__version__ = "0.1.0"
