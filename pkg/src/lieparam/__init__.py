"""Exact rational computations with complete dg Lie models of parametrized
spectra: free Lie algebras, retractive models, spectra, modules over the
enveloping algebra and the functor to modules."""

from .cdgl import CdglPresentation, check_differential, gauge, homology, ls_interval
from .errors import CertificateFailure, InputError, LieParamError
from .freelie import Alphabet, Generator, TensorElt, bch, bracket, generator
from .psi import functor_C, functor_D, kernel_spectrum, psi, smash_spectrum, stable_homotopy_ranks
from .retractive import RetractiveModel, loop_model, suspension_model
from .spectra import FreeSpectrum, sphere_spectrum_model, stable_homology, suspension_spectrum
from .ulmod import ULModule, ext, semifree_resolution, tensor_diag, uhat_module

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "CdglPresentation", "CertificateFailure", "FreeSpectrum", "Generator", "InputError",
    "LieParamError", "RetractiveModel", "TensorElt", "ULModule", "bch", "bracket", "check_differential",
    "ext", "functor_C", "functor_D", "gauge", "generator", "homology", "kernel_spectrum", "loop_model",
    "ls_interval", "psi", "semifree_resolution", "smash_spectrum", "sphere_spectrum_model",
    "stable_homology", "stable_homotopy_ranks", "suspension_model", "suspension_spectrum", "tensor_diag",
    "uhat_module",
]
