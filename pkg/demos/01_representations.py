"""Four ways to write down one quantum map, and how to move between them.

An amplitude-damping qubit channel is expressed in the tomographic,
operator-sum, A-form and B-form (Choi) representations; each one reproduces
the same action, and the trace/Hermiticity/complete-positivity criteria can
be read off in whichever form is closest at hand.
"""

import numpy as np

from qmaps import (
    apply_map,
    check_cp,
    check_hp,
    check_tp,
    convert,
    dual_basis,
    kraus_rank,
    reshuffle,
    standard_channel,
    state_basis,
    to_aform,
    to_bform,
    to_operator_sum,
)

np.set_printoptions(precision=4, suppress=True, linewidth=100)

channel = standard_channel("amplitude_damping", gamma=0.5)
print("amplitude damping, gamma = 0.5")
print("Kraus operators:")
for k in channel.rep.left_ops:
    print(k, "\n")

rho = np.array([[0.25, 0.3j], [-0.3j, 0.75]], dtype=complex)
print("input state:\n", rho)
print("output state:\n", apply_map(channel, rho))

# --- matrix forms ---------------------------------------------------------
b = to_bform(channel).matrix
a = to_aform(channel).matrix
print("\nB form (Choi matrix), trace equals d_in for a TP map:")
print(b, "\ntrace:", np.trace(b).real)
print("\nA form, acting on vectorised states:")
print(a)
print("\nreshuffling the A form recovers the B form:",
      np.allclose(reshuffle(a, 2, 2), b))

# --- tomographic form -----------------------------------------------------
states = state_basis(2)
duals = dual_basis(states)
print("\ntomographic frame: four preparations and their duals")
print("first preparation:\n", states[0])
print("its dual:\n", duals[0])
tomo = convert(channel, "tomographic")
print("reconstructed action agrees:",
      np.allclose(apply_map(tomo, rho), apply_map(channel, rho)))

# --- property checks ------------------------------------------------------
print("\nproperty checks in the stored representation:")
tp, residual = check_tp(channel)
print(f"  trace preserving: {tp} (residual {residual:.2e})")
print(f"  Hermiticity preserving: {check_hp(channel)}")
cp, min_eig = check_cp(channel)
print(f"  completely positive: {cp} (min Choi eigenvalue {min_eig:.2e})")
print(f"  Kraus rank: {kraus_rank(channel)}")

# --- a map that is not a channel ------------------------------------------
from qmaps import bform_map
from qmaps.linalg import swap_gate

transpose = bform_map(swap_gate(2))
cp, min_eig = check_cp(transpose)
print("\nthe transpose map (B form = SWAP):")
print(f"  completely positive: {cp} (min Choi eigenvalue {min_eig:+.1f})")
print("  canonical operator pairs pick up the eigenvalue signs:")
rep = to_operator_sum(transpose)
print(f"  left/right pairs: {len(rep.left_ops)}, equal up to sign:",
      all(np.allclose(l, r) or np.allclose(l, -r) for l, r in zip(rep.left_ops, rep.right_ops)))
