# coding: utf-8

# # Switching off couplings with random NOT pulses
#
# A random train of NOT pulses on one qubit averages its couplings away.
# The pair that stays coupled keeps its phase. Spectator phases shrink to
# affine terms that can be predicted and removed.

import numpy as np

from fixint.interaction import PhasePolynomial, canonical_qft_model, fit_phase_polynomial, pair_coefficient
from fixint.schedule import build_decoupling_schedule, compensation_for_decoupling, schedule_unitary

l, kept = 4, (3, 1)
model = canonical_qft_model(l)
predicted = PhasePolynomial(l, quadratic={kept: pair_coefficient(model, *kept)}) - compensation_for_decoupling(model, kept, 1.0)
print("predicted constant:", predicted.constant)
print("predicted linear:", predicted.linear)


# ## Averaging over seeds

fits = []
for seed in range(40):
    u = np.diag(schedule_unitary(build_decoupling_schedule(model, kept, 2000.0, 1.0, seed)))
    ref = predicted.table()
    fits.append(fit_phase_polynomial(ref - np.angle(u * np.exp(1j * ref)), l)[0])

print("measured constant:", np.mean([f.constant for f in fits]))
print("measured linear:", np.mean([f.linear for f in fits], axis=0))
print("kept quadratic:", np.mean([f.quadratic[kept] for f in fits]), "vs", predicted.quadratic[kept])
