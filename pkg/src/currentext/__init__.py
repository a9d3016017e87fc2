"""Numerical toolkit for current groups on the three-sphere and their extensions."""

from . import algebra, geometry, forms, fields, cochains, duals, extension, suites
from .cli import main, run_suite
from .suites import Check, SuiteConfig, convergence_study

__version__ = "0.1.0"

__all__ = [
    "algebra", "geometry", "forms", "fields", "cochains", "duals", "extension", "suites",
    "main", "run_suite", "Check", "SuiteConfig", "convergence_study", "__version__",
]
