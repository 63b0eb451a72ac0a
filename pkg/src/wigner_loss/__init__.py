"""Wigner-function negativity of bosonic states under pure photon loss."""
from .channel import EfficiencyError, apply_loss, beamsplitter_oracle, kraus_operators, map_s
from .closed_forms import (
    DomainError,
    LossBudget,
    abs_w0_curve,
    asymptote_w0,
    asymptote_w0_rate2,
    family_params_for_mean,
    w0_closed_form,
    w0_fock,
    w0_odd_cat,
    w0_small_loss,
    w0_squeezed_single,
)
from .fock import CutoffError, DensityDiagnostics, validate_density
from .negativity import NegativityReport, find_min, negative_volume, negativity_report, threshold_eta
from .qpd import (
    PhaseGrid,
    QpdGrid,
    QpdKernel,
    UnsupportedOrderingError,
    blur_convolve,
    char_fn,
    lossy_qpd_grid,
    overlap_integral,
    qpd_grid,
    qpd_value,
    w0_parity_series,
)
from .states import (
    StateParameterError,
    StateSpec,
    coherent_state,
    fock_state,
    mean_quanta,
    mixed_example_state,
    odd_cat_state,
    squeezed_single_photon,
    vacuum,
)

__version__ = "0.1.0"
