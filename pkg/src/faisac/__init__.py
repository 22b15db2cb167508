"""Joint transmit-beamformer and fluid-antenna-position optimization for an
ISAC downlink: WMMSE block surrogate, proximal-distance beamformer updates,
extrapolated projected-gradient position updates, and baseline comparisons.
"""

from .baselines import PsoOptions, fpa_positions, fpa_solve, pso_solve
from .epg import EpgOptions, epg_solve, grad_t, quadratic_forms
from .model import (
    ChannelSet,
    Scenario,
    beampattern,
    build_channels,
    eight_user_scenario,
    probing_power,
    sinr,
    steering_vector,
    sum_rate,
    two_user_scenario,
    uniform_apv,
)
from .pda import PdaOptions, pda_solve, project_power, project_probe
from .qcqp import Surrogate, build_surrogate, project_chain, project_feasible
from .solver import (
    BsumOptions,
    InfeasibleScenario,
    Solution,
    bsum_solve,
    init_solution,
    probing_ceiling,
)
from .wmmse import (
    AuxState,
    QuadraticData,
    assemble_quadratic,
    mmse_aux,
    objective_F,
    update_rho,
    update_u,
)

__version__ = "0.1.0"
