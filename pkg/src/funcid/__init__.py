"""funcid: black-box function identification via landscape images.

Turns sampled input/output pairs of benchmark functions into structured
M x M "landscape images", builds labeled datasets across single-, multi-,
and unseen-instance regimes, and trains small from-scratch neural
classifiers to recognize the generating function.
"""

__version__ = "0.1.0"
