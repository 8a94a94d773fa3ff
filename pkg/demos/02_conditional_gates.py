"""Dissipation as a gate: conditional rotations that stabilize themselves.

Loading the source mode with ell photons and letting the collective decay
run to completion applies U^ell to the target, with no Hamiltonian control
and no timing sensitivity: once the photons are gone the target sits still.
States the jump operator annihilates (dark states) leave the target
untouched, which turns photon-number superpositions into branching gates.
"""

import numpy as np

from nonrecip import (
    Operator,
    average_gate_fidelity,
    basis_ket,
    conditional_reduced_channel,
    destroy,
    directional,
    expm,
    gate_protocol_spaces,
    sigma,
    single_site,
)

theta = np.pi / 6
u = Operator(single_site(2), expm(-1j * theta * sigma("z").data / 2))
l = directional(destroy(3), u, gamma=1.0)

print("conditional gate fidelities at several wait times (target: U^ell)")
print("ell  t=2        t=8        t=30")
for ell in (1, 2):
    target = Operator(single_site(2), np.linalg.matrix_power(u.data, ell))
    row = []
    for t in (2.0, 8.0, 30.0):
        ch = conditional_reduced_channel(l, {0: basis_ket(3, ell)}, 1, t)
        row.append(f"{average_gate_fidelity(ch, target):.7f}")
    print(f"  {ell}  " + "  ".join(row))

dark = conditional_reduced_channel(l, {0: basis_ket(3, 0)}, 1, 30.0)
ident = Operator(single_site(2), np.eye(2))
print(f"dark input, fidelity to identity: "
      f"{average_gate_fidelity(dark, ident):.12f}")
print()

# the protocol's bookkeeping: which source states are inert, which are ready
spaces = gate_protocol_spaces(destroy(3))
print(f"dark subspace dimension:  {spaces.dark.shape[1]}")
print(f"ready subspace dimension: {spaces.ready.shape[1]}")
