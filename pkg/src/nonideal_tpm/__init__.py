"""Work estimation in the two-point-measurement scheme with thermal-pointer measurements."""

__version__ = "0.1.0"

from .errors import TPMError
from .fluct import (
    chi,
    characteristic_function,
    crooks_report,
    dissipation_identity,
    fannes_bound,
    jarzynski_functional,
    kpv_extended,
    kpv_ideal,
    second_law_bound,
)
from .linalg import (
    hermitian_spectrum,
    kron,
    partial_trace_pointer,
    relative_entropy,
    trace_distance,
    vn_entropy,
)
from .measurement import (
    AssignmentMatrix,
    MeasurementChannel,
    PointerModel,
    assignment_min_invasive,
    assignment_minimal_energy,
    build_channel,
    build_joint_post_state,
    build_measurement_unitary,
    conditional_state,
    correlation_value,
    group_weights,
    measurement_energy_cost,
)
from .thermo import HermitianOperator, cooling_cost, free_energy_difference, gibbs
from .tpm import (
    Process,
    backward_joint,
    backward_process,
    deviation_bound,
    energy_change_nonideal,
    fourier_unitary,
    ideal_joint,
    mean_work,
    nonideal_joint,
    transition_matrix,
    work_decomposition,
    work_distribution,
)
