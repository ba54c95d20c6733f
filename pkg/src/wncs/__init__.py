"""Wireless networked control co-design simulator.

Prediction-aided estimation and control of unstable LTI plants over shared
fading links, with an age-of-information aware drift-plus-penalty scheduler.
"""

__version__ = "0.1.0"
