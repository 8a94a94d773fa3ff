"""Measuring who influences whom, and how much.

Isolation of a subsystem is 1 minus half the worst-case diamond distance
between its reduced evolutions conditioned on two initial states of the
other side. A perfectly isolated side scores 1; a side whose dynamics can
be steered into orthogonal channels scores 0. Comparing both sides
classifies the interaction, and the spectrum of the conditioning unitary
caps how low the driven side can be pushed.
"""

import numpy as np

from nonrecip import (
    Operator,
    basis_ket,
    cascaded,
    classify,
    destroy,
    directional,
    expm,
    isolation,
    sigma,
    single_site,
    target_isolation_bound,
)

u = Operator(single_site(2), expm(-1j * np.pi / 3 * sigma("z").data / 2))
one_way = directional(destroy(2), u, gamma=1.0)

t = 4.0
iso_source = isolation(one_way, probed=0, other=1, t=t, restarts=8, seed=1)
iso_target = isolation(one_way, probed=1, other=0, t=t, restarts=8, seed=2)
label = classify([iso_source.value], [iso_target.value])
print("collective-decay model:")
print(f"  source isolation {iso_source.value:.6f}")
print(f"  target isolation {iso_target.value:.6f}")
print(f"  verdict: {label}")
print()

# a two-way comparison: coherent coupling plus matched collective decay
both = cascaded(destroy(2), Operator(single_site(2), sigma("-").data), 1.0)
iso_a = isolation(both, probed=0, other=1, t=t, restarts=8, seed=3)
iso_b = isolation(both, probed=1, other=0, t=t, restarts=8, seed=4)
print("cascaded model (source drives target, never the reverse):")
print(f"  upstream isolation   {iso_a.value:.6f}")
print(f"  downstream isolation {iso_b.value:.6f}")
print(f"  verdict: {classify([iso_a.value], [iso_b.value])}")
print()

print("spectral ceilings on the driven side (rotation angle theta, ell photons):")
for theta in (np.pi / 6, np.pi / 2, np.pi):
    u = Operator(single_site(2), expm(-1j * theta * sigma("z").data / 2))
    for ell in (1, 2):
        rep = target_isolation_bound(u, ell)
        print(f"  theta={theta:.4f} ell={ell}: ceiling {rep.value:.6f} "
              f"(pairwise estimate {rep.pairwise:.6f})")
