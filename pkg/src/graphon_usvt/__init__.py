"""Graphon estimation by universal singular value thresholding, with the
spectral, packing and Monte Carlo tooling around it."""

__version__ = "0.1.0"

from .graphon import (EigenFunction, MeasurePreservingMap, SbmSpec, SpectralGraphon,
                      apply_measure_preserving, constant_graphon, decay_envelope_check,
                      discretize_operator, evaluate, from_sbm, operator_spectrum, parse_map,
                      tail_eigen_sum, trig_decay_graphon)
from .sampler import (DEFAULT_SEED, LatentSample, bin_counts, probability_matrix,
                      sample_adjacency, sample_latents, sample_latents_conditioned, stream_rng)
from .usvt import UsvtConfig, UsvtEstimate, mse, spectral_profile, usvt_estimate
from .spectra import eigen_tail_profile, tail_decay_certificate
