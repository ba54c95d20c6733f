"""Walk through the pendulum plant, its LQR design and the Lyapunov certificate.

Run with ``python demos/plant_and_controller.py``.
"""

import numpy as np

from wncs.control import compute_action
from wncs.numerics import spectral_radius
from wncs.plant import PENDULUM_X0, THETA_INDEX, draw_plant_noise, pendulum_preset, step

np.set_printoptions(precision=4, suppress=True)

sys = pendulum_preset()
print("open-loop eigenvalue moduli:", np.sort(np.abs(np.linalg.eigvals(sys.A))))
print("LQR gain Phi:", sys.Phi.ravel())
print("closed-loop spectral radius:", round(spectral_radius(sys.closed_loop), 4))
print("Lyapunov matrix eigenvalues:", np.linalg.eigvalsh(sys.Z))

# perfect state feedback from the nominal initial tilt
rng = np.random.default_rng(0)
x = PENDULUM_X0.copy()
for k in range(90):
    x = step(sys, x, compute_action(sys, x), draw_plant_noise(sys, rng))
    if k % 15 == 14:
        print(f"slot {k + 1:3d}  |theta| = {abs(x[THETA_INDEX]):.5f}")
