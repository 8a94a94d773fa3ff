"""Directional open-quantum-system dynamics toolkit.

Builds master equations whose dissipators push influence one way between
subsystems, quantifies that directionality with diamond-norm isolation
measures, and reproduces the behavior from microscopic cavity-qubit and
waveguide models.
"""

__version__ = "0.1.0"

from .channels import (
    Channel,
    average_gate_fidelity,
    channel_from_matrix,
    channel_from_superop,
    compose,
    conditional_reduced_channel,
    identity_channel,
    kraus_channel,
    trace_out_channel,
    unitary_channel,
)
from .liouville import (
    Lindbladian,
    Superoperator,
    apply_generator,
    asymptotic_channel,
    liouvillian,
    propagate,
    unvec,
    vec,
)
from .metrics import (
    BoundReport,
    EvaluatorDisagreement,
    IsolationReport,
    classify,
    dephasing_isolation_closed_form,
    diamond_distance,
    distinguish_probability,
    isolation,
    log_negativity,
    target_isolation_bound,
)
from .models import (
    BRRates,
    EffectiveParams,
    GateSpaces,
    UnitarityReport,
    bloch_redfield_rates,
    bloch_redfield_rates_exact,
    cascade_effective_unitary,
    cavity_qubit_reservoir,
    cascaded,
    chiral_cascade,
    coupling_for_target_unitary,
    directional,
    effective_params,
    feedforward_kraus,
    gate_protocol_spaces,
    generalized_unitarity_check,
    generalized_unitary_from_generator,
    lambda_c_for_angle,
    multi_dissipator_two_mode,
    steady_state_map,
    two_mode_unitary_grid,
)
from .qcore import (
    CompositeSpace,
    Ket,
    Operator,
    basis_ket,
    destroy,
    embed,
    embed_full,
    expm,
    identity,
    number,
    partial_trace,
    place,
    product_ket,
    random_sample,
    sigma,
    single_site,
    tensor,
    trace_norm,
)

__all__ = [
    "__version__",
    "Channel",
    "average_gate_fidelity",
    "channel_from_matrix",
    "channel_from_superop",
    "compose",
    "conditional_reduced_channel",
    "identity_channel",
    "kraus_channel",
    "trace_out_channel",
    "unitary_channel",
    "Lindbladian",
    "Superoperator",
    "apply_generator",
    "asymptotic_channel",
    "liouvillian",
    "propagate",
    "unvec",
    "vec",
    "BoundReport",
    "EvaluatorDisagreement",
    "IsolationReport",
    "classify",
    "dephasing_isolation_closed_form",
    "diamond_distance",
    "distinguish_probability",
    "isolation",
    "log_negativity",
    "target_isolation_bound",
    "BRRates",
    "EffectiveParams",
    "GateSpaces",
    "UnitarityReport",
    "bloch_redfield_rates",
    "bloch_redfield_rates_exact",
    "cascade_effective_unitary",
    "cavity_qubit_reservoir",
    "cascaded",
    "chiral_cascade",
    "coupling_for_target_unitary",
    "directional",
    "effective_params",
    "feedforward_kraus",
    "gate_protocol_spaces",
    "generalized_unitarity_check",
    "generalized_unitary_from_generator",
    "lambda_c_for_angle",
    "multi_dissipator_two_mode",
    "steady_state_map",
    "two_mode_unitary_grid",
    "CompositeSpace",
    "Ket",
    "Operator",
    "basis_ket",
    "destroy",
    "embed",
    "embed_full",
    "expm",
    "identity",
    "number",
    "partial_trace",
    "place",
    "product_ket",
    "random_sample",
    "sigma",
    "single_site",
    "tensor",
    "trace_norm",
]
