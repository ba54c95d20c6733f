"""Predict a pendulum trajectory from stale samples with the GPR predictor.

Samples arrive every third slot; between arrivals the predictor fills in and
its variance shows how quickly the information ages.
"""

import numpy as np

from wncs.control import compute_action
from wncs.plant import PENDULUM_X0, THETA_INDEX, draw_plant_noise, pendulum_preset, step
from wncs.prediction import GprMode, KernelParams, TrainingSet, ingest, predict_or_prior

sys = pendulum_preset()
rng = np.random.default_rng(2)
params = KernelParams()
train = TrainingSet(sys.D, GprMode.DIRECT)

x = PENDULUM_X0.copy()
for k in range(30):
    pred = predict_or_prior(train, k, params)
    if k % 3 == 0:
        ingest(train, k, x)
    print(f"slot {k:2d}  theta {x[THETA_INDEX]: .5f}  predicted {pred.mean[THETA_INDEX]: .5f}"
          f"  variance {pred.var[THETA_INDEX]:.4f}")
    x = step(sys, x, compute_action(sys, x), draw_plant_noise(sys, rng))
