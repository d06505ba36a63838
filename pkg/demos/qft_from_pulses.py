# coding: utf-8

# # A Fourier transform built from single-qubit pulses
#
# The register sits under an always-on diagonal coupling. All we control are
# Hadamards and NOT pulses on individual qubits. This walk-through builds the
# exact compensated plan, then stochastic plans at increasing pulse rates.

import numpy as np

from fixint.qft import Direction, Mode, build_qft_plan, plan_fidelities, plan_summary


# ## Exact plan
#
# Diagonal leftovers are removed by ideal phase events at the start and end.

plan = build_qft_plan(4, Direction.INVERSE, Mode.ORACLE_COMPENSATED)
print(plan_summary(plan))
print("worst basis fidelity:", plan_fidelities(plan).min())


# ## Stochastic plans
#
# Here the compensating phases are themselves made from random NOT pulses,
# so fidelity improves as the pulse rate grows.

for rate in (500.0, 2000.0, 8000.0):
    fids = [plan_fidelities(build_qft_plan(3, Direction.INVERSE, Mode.UNIT_YUKAWA, rate=rate, seed=s)).mean() for s in range(10)]
    print(f"rate {rate:6.0f}: mean fidelity {np.mean(fids):.5f}")


# ## Forward direction
#
# The same pulses, conjugated differently, give the forward transform.

fwd = build_qft_plan(3, Direction.FORWARD, Mode.ORACLE_COMPENSATED)
print("forward worst fidelity:", plan_fidelities(fwd).min())
