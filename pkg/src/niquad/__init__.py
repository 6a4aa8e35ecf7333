"""Negative-imaginary attitude control of a quadrotor: models, NI tests,
dissipation checks and closed-loop simulation."""

from .controllers import (
    InnerGains,
    IrcController,
    dc_gain,
    gain_bound_check,
    inner_torque,
    irc_derivative,
    irc_realization,
    sector_bound_verify,
    steady_state_map,
    theorem_hypotheses_report,
)
from .lin_ni import (
    CheckReport,
    FrequencyGrid,
    LtiStateSpace,
    default_grid,
    ni_frequency_test,
    sni_frequency_test,
    sni_state_space_test,
    transfer_at,
)
from .quadrotor import QuadrotorParams, RotationalCoefficients
from .sim import Scenario, Trajectory, convergence_metrics, simulate, simulate_many
from .storage_ni import StorageFunction, StorageKind, dissipation_check, storage_value

__version__ = "0.1.0"
