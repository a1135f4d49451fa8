"""Entropy rigidity experiments for dispersing billiards.

Modules: geometry (tables), billiard (the collision map and its jets),
symbolic (itineraries), orbits (periodic and homoclinic orbits), normal_form
(Birkhoff normal forms and homoclinic frames), asymptotics (horseshoe
families, fits, rigidity verdicts), suspension (subshifts, suspension
entropy and flexibility), config/pipeline/cli (experiment plumbing).
"""
from .errors import (ArtifactError, DomainError, InfeasibleError, NonConvergenceError,
                     ValidationError)
from .geometry import BilliardTable, Circle, Ellipse, FourierCircle, load_table, symmetric_three_disks

__version__ = "0.1.0"

__all__ = ["ArtifactError", "ValidationError", "DomainError", "NonConvergenceError", "InfeasibleError",
           "BilliardTable", "Circle", "Ellipse", "FourierCircle", "load_table", "symmetric_three_disks"]
