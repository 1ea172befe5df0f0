"""Complementary charge distributions for two pairs of bodies.

Discretizes the pair-interaction operator between two charged bodies,
computes its weighted eigensystem, builds weak and strong complementary
quadruples from eigenfunctions, and checks the complementarity inequalities.
"""
__version__ = "0.1.0"

from .cubature import Cubature, axisym_project, build_box, build_cylinder
from .errors import (ComplementarityError, InadmissibleAlphaError, IndefiniteModeError,
                     InvalidArgumentError, InvalidPairError, NumericalFailureError,
                     SingularKernelError, UnsupportedDomainError)
from .kernel import KernelSpec, Pose, evaluate, evaluate_posed
from .operator import DiscreteOperator, apply, assemble, assemble_posed, pair_force
from .spectral import EigenSystem, check_definiteness, decompose
from .synthesis import Quadruple, alpha_max, strong_quadruple, weak_quadruple
from .verify import PoseScanResult, VerificationReport, check_system, interaction_matrix, pose_scan
from .estimators import ComplementarityDesigner, InteractionSpectrum

__all__ = [
    "Cubature", "axisym_project", "build_box", "build_cylinder",
    "ComplementarityError", "InadmissibleAlphaError", "IndefiniteModeError",
    "InvalidArgumentError", "InvalidPairError", "NumericalFailureError",
    "SingularKernelError", "UnsupportedDomainError",
    "KernelSpec", "Pose", "evaluate", "evaluate_posed",
    "DiscreteOperator", "apply", "assemble", "assemble_posed", "pair_force",
    "EigenSystem", "check_definiteness", "decompose",
    "Quadruple", "alpha_max", "strong_quadruple", "weak_quadruple",
    "PoseScanResult", "VerificationReport", "check_system", "interaction_matrix", "pose_scan",
    "ComplementarityDesigner", "InteractionSpectrum",
]
