"""Exact verification of shifted Poisson structures on finite and matrix models.

Modules: ``linalg``/``graded`` (exact linear algebra), ``lie2`` (crossed
modules and Lie 2-algebra morphisms), ``mc`` (Maurer-Cartan calculus),
``fingrpd`` (finite groupoid cohomology), ``vbgrpd`` (VB groupoids),
``homrep`` (2-term homotopy modules), ``qpois`` (quasi-Poisson structures on
matrix groups), ``suites`` and ``cli``.
"""
from .report import HswError, ValidationReport
from .scalars import ScalarBackend

__version__ = "0.1.0"

__all__ = ["HswError", "ValidationReport", "ScalarBackend", "__version__"]
