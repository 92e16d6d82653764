"""Time-multiplexed hologram generation (OSPR, STTM, hybrid) for quantized phase devices."""

from .errors import *  # noqa: F401,F403
from .field import (
    ComplexField,
    RandomStream,
    count_transforms,
    forward_transform,
    inverse_transform,
    reference_dft,
    rotate_field,
    uniform_phase_samples,
)
from .hologen import (
    BINARY,
    Algorithm,
    DeviceSpec,
    GenerationPlan,
    Hologram,
    SubframeSet,
    generate,
    generate_hybrid,
    generate_ospr,
    generate_sttm,
    quantize,
    randomize_phase,
    sttm_angles,
    symmetrize_target,
    union_constellation,
)
from .metrics import (
    ConvergenceSeries,
    ErrorReport,
    ReplayAccumulator,
    accumulate,
    averaged_replay,
    convergence_series,
    mse,
    optimal_gain,
    perceived_amplitude,
    simulate_replay,
)
from .theory import (
    asymptotic_ratio,
    delta_mse_pixel,
    diffraction_stats,
    expected_mse_direct,
    expected_mse_formula,
    monte_carlo_quant_error,
    quantization_scatter,
    rayleigh_pdf,
    sector_mean_error,
)
from .images import bundled_photo, load_image, save_hologram, save_intensity, synthetic_texture

__version__ = "0.1.0"
