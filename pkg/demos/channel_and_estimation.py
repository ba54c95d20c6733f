"""One uplink transmission: fading draw, SNR test and the MMSE estimate.

The sensor divides the state by a source scale before sending so the analog
symbols have roughly unit power; the receiver multiplies the estimate back.
"""

import numpy as np

from wncs.channel import Direction, LinkState, channel_gain, db_to_linear, draw_channel, transmit
from wncs.estimation import mmse_estimate

np.set_printoptions(precision=5, suppress=True)

rng = np.random.default_rng(1)
N0 = db_to_linear(-20.0)
P = db_to_linear(20.0)
x = np.array([0.01, -0.02, 0.1, 0.05])

for scale in (1.0, 0.01):
    link = LinkState(Direction.UL, 4, snr_threshold=db_to_linear(10.0), noise_floor=N0)
    link.H = draw_channel(4, rng)
    link.alpha, link.power = 1, P
    y, xi = transmit(link, x / scale, rng)
    print(f"source scale {scale}: gain {channel_gain(link.H):.3f}, received {bool(xi)}")
    if xi:
        est = mmse_estimate(y, link.H, P, N0)
        print("  estimate:", scale * est.estimate)
        print("  error std:", scale * np.sqrt(np.diag(est.error_cov)))
