"""Channels from joint unitaries, and joint unitaries from channels.

Every channel is the reduced dynamics of some system-environment unitary.
This script builds channels from dilations, recovers dilations by completing
the Kraus isometry, and reconstructs a channel's Choi matrix by sending half
of an entangled pair through it.
"""

import numpy as np

from qmaps import (
    ancilla_assisted,
    channel_from_dilation,
    dilation_channel,
    random_cptp_map,
    same_map,
    standard_channel,
    stinespring_dilate,
    to_bform,
)
from qmaps.linalg import swap_gate

np.set_printoptions(precision=4, suppress=True, linewidth=100)
rng = np.random.default_rng(7)

# --- dilation -> channel ----------------------------------------------------
print("a SWAP interaction with a |0><0| environment discards the system:")
constant = channel_from_dilation(np.diag([1.0, 0.0]).astype(complex), swap_gate(2))
rho = np.array([[0.2, 0.1], [0.1, 0.8]], dtype=complex)
from qmaps import apply_map

print(apply_map(constant, rho))

# --- channel -> dilation ----------------------------------------------------
print("\nStinespring dilation of amplitude damping (gamma = 0.3):")
channel = standard_channel("amplitude_damping", gamma=0.3)
dilation = stinespring_dilate(channel)
print(f"environment dimension: {dilation.d_e}")
print("joint unitary:\n", dilation.unitaries[0])
print("round trip reproduces the channel:",
      same_map(dilation_channel(dilation), channel, tol=1e-10))

print("\nthe same works for any random CPTP map:")
for _ in range(3):
    m = random_cptp_map(2, rng)
    d = stinespring_dilate(m)
    print(f"  kraus rank {len(m.rep.left_ops)} -> d_e {d.d_e}, "
          f"round trip ok: {same_map(dilation_channel(d), m, tol=1e-9)}")

# --- ancilla-assisted tomography --------------------------------------------
print("\nancilla-assisted tomography: feed half of |I><I|/d through the channel")
recovered = ancilla_assisted(dilation)
direct = to_bform(channel).matrix
print("recovered Choi matches the direct B form:",
      np.allclose(recovered.rep.matrix, direct, atol=1e-10))
print(recovered.rep.matrix)
