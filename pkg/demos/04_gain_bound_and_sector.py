"""
Gain bound and sector condition
===============================

At steady state the inner loop maps v to eta = v / k_p per axis and the IRC
maps eta to eta / phi. The loop gain squared is max 1/(k_p phi)^2; it must
stay below one.
"""

import numpy as np

from niquad import InnerGains, gain_bound_check, sector_bound_verify, theorem_hypotheses_report
from niquad.lin_ni import FrequencyGrid

kp = InnerGains(2.0, 3.0, 4.0)
samples = np.random.default_rng(4).normal(size=(5000, 3))
for phi in (0.3, 0.5, 1.0):
    bound = gain_bound_check(kp, phi)
    sector = sector_bound_verify(kp, phi, samples)
    print(f"phi={phi}: gamma^2={bound.gamma_sq:.4f} satisfied={bound.satisfied} "
          f"sector passed={sector.passed} worst ratio={sector.details['max_ratio']:.4f} at {np.round(sector.witness, 3)}")

print()
report = theorem_hypotheses_report(kp, 1.0, 2 * np.eye(3), FrequencyGrid.log(1e-3, 1e3, 200))
print(report.summary())
