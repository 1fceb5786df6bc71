"""diffread: optical diffraction read-channel simulator for probe storage.

Core layers: `physics` (far-field and Kirchhoff diffraction), `modem`
(balanced-ternary modulation and DFT demodulation), `channel` (noise and
positioning jitter), `detect` (threshold and sequence detection) and
`experiments` (seeded Monte Carlo sweeps). A FastAPI service in
`diffread.service` wraps the experiments; the `diffread` CLI is a thin
client of that service.
"""

__version__ = "0.1.0"

from .channel import (ArrayReadFrame, JitterParams, NoiseParams,
                      ReceivedVector, effective_depth, optimal_pit_depth,
                      sigma_for_snr_db, simulate_array_read, snr_db, transmit)
from .detect import (ScaleEstimate, estimate_scale, ml_sequence_detect,
                     threshold_detect)
from .errors import (ConfigError, DegenerateDepth, DegenerateScale,
                     DiffreadError, FarFieldViolation, GeometryError,
                     MalformedHeader, NotNormalized, OddLength,
                     OutOfRangeBlock, QuadratureNonConvergence, TooLarge,
                     ZeroNoise)
from .modem import (SampledIntensity, central_trits, count_distinct_patterns,
                    decode_trits_to_bits, demodulate, encode_bits_to_trits,
                    recover_trit_values, recover_trits_noiseless,
                    sample_fraunhofer, sampling_grid, trits_to_indentations)
from .physics import (ArrayGeometry, FourierCoefficients, ObservationPoint,
                      closed_form_field, envelope, fraunhofer_intensity,
                      fresnel_number, kirchhoff_field, structure_factor)

__all__ = [
    "__version__",
    "ArrayGeometry", "ArrayReadFrame", "FourierCoefficients", "JitterParams",
    "NoiseParams", "ObservationPoint", "ReceivedVector", "SampledIntensity",
    "ScaleEstimate",
    "central_trits", "closed_form_field", "count_distinct_patterns",
    "decode_trits_to_bits", "demodulate", "effective_depth",
    "encode_bits_to_trits", "envelope", "estimate_scale",
    "fraunhofer_intensity", "fresnel_number", "kirchhoff_field",
    "ml_sequence_detect", "optimal_pit_depth", "recover_trit_values",
    "recover_trits_noiseless", "sample_fraunhofer", "sampling_grid",
    "sigma_for_snr_db", "simulate_array_read", "snr_db", "structure_factor",
    "threshold_detect", "transmit", "trits_to_indentations",
    "ConfigError", "DegenerateDepth", "DegenerateScale", "DiffreadError",
    "FarFieldViolation", "GeometryError", "MalformedHeader", "NotNormalized",
    "OddLength", "OutOfRangeBlock", "QuadratureNonConvergence", "TooLarge",
    "ZeroNoise",
]
