"""Second-law bookkeeping for quantum measurement and feedback on finite systems."""
from .information import (
    InformationReport,
    SigmaPair,
    classical_mutual_info_oracle,
    dij_matrix,
    h_tilde,
    qc_mutual_info,
    shannon_entropy,
    sigma_pair,
    von_neumann_entropy,
)
from .measurement import (
    MeasurementChannel,
    OutcomeDistribution,
    BranchEnsemble,
    is_classical,
    measure,
    povm,
    random_channel,
    random_unitary,
    unitary_from_hamiltonian,
)
from .operators import CompositeSpace, hermitian_matfunc, matrix_sqrt_sandwich, partial_trace, tensor, validate
from .protocol import (
    InequalityVerdict,
    applicable_verdicts,
    ProtocolLedger,
    ProtocolSpec,
    run,
    verify_clausius,
    verify_entropy_inequality,
    verify_exact_second_law,
    verify_isothermal,
    verify_two_bath,
)
from .scenarios import AnalyticLedger, carnot_feedback_scenario, szilard_scenario
from .thermo import BathSpec, PhysicalConstants, free_energy, gibbs_state, internal_energy, partition_function

__version__ = "0.1.0"
