"""Propagators, baths and model Hamiltonians."""

from .baths import (
    OhmicBath,
    bath_phase_q1,
    bath_phase_q2,
    ohmic_correlation,
    ohmic_correlation_integral,
    ohmic_correlation_quadrature,
    trigamma,
)
from .fields import (
    ConstantField,
    ControlField,
    FourierField,
    FunctionField,
    GridField,
    WindowedSineField,
    ZeroField,
    as_field,
    half_cosine_ramp,
)
from .grid import TimeGrid, Trajectory
from .models import (
    CNOT,
    CnotModel,
    ConfigurationError,
    charge_qubit_channels,
    charge_qubit_controlled,
    charge_qubit_hamiltonian,
)
from .propagators import (
    ControlledHamiltonian,
    IntegrationError,
    LindbladChannel,
    dissipator,
    lindblad_apply,
    propagate_lindblad,
    propagate_superop,
    propagate_unitary,
)
from .redfield import propagate_redfield_doubledot
from .spin_boson import (
    MemoryKernelModel,
    SpinBosonModel,
    propagate_nonmarkovian_bloch,
    spin_boson_memory,
)
