# coding: utf-8

# # Dropping weak pairs
#
# Pair phases fall off as 2^-r with distance, so small ones can be skipped.
# Each qubit then touches only a few partners and the duration grows
# linearly with register size.

import math

import numpy as np

from fixint.qft import Direction, approximate_qft_plan, ideal_qft, pairs_per_qubit, run_plan
from fixint.statevector import StateVector, bit_reverse_permutation, fidelity

threshold = math.pi / 2**6
for l in (6, 8, 10, 12):
    plan = approximate_qft_plan(l, Direction.INVERSE, threshold)
    print(f"l={l:2d} duration {plan.duration:8.1f} most pairs on one qubit {pairs_per_qubit(plan).max()}")


# ## Accuracy on random states

plan = approximate_qft_plan(8, Direction.INVERSE, threshold)
rev = bit_reverse_permutation(8)
rng = np.random.default_rng(1)
fids = []
for _ in range(20):
    psi = StateVector.from_array(rng.normal(size=256) + 1j * rng.normal(size=256), normalize=True)
    fids.append(fidelity(StateVector(8, run_plan(psi, plan).amplitudes[rev]), ideal_qft(psi, Direction.INVERSE)))
print("min fidelity over 20 random states:", min(fids))
