"""Generating-function accessibility tools for continuous-mixture identifiability."""

from .accessibility import (AccessibilityMapping, VerificationReport, builtin_mappings, get_mapping,
                            transport_mixed_mgf, verify_corollary1, verify_corollary2,
                            verify_definition1)
from .defun import DifferentiatedErrorFunction
from .kernels import Family, KernelDistribution, kernel, parse_kernel_spec
from .mixtures import MixingDensity, MixtureModel, parse_mixing
from .transforms import CharacteristicFunction, QuadratureConfig, gil_pelaez_pdf

__version__ = "0.1.0"

__all__ = [
    "AccessibilityMapping", "VerificationReport", "builtin_mappings", "get_mapping",
    "transport_mixed_mgf", "verify_corollary1", "verify_corollary2", "verify_definition1",
    "DifferentiatedErrorFunction", "Family", "KernelDistribution", "kernel", "parse_kernel_spec",
    "MixingDensity", "MixtureModel", "parse_mixing", "CharacteristicFunction", "QuadratureConfig",
    "gil_pelaez_pdf",
]
