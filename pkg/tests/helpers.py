"""Shared helpers for the acceptance suite."""

import numpy as np


def random_model_points(name, rng):
    """A random but well-conditioned (x grid, parameter vector) per model."""
    if name == "lorentzian":
        x = np.linspace(-5.0, 5.0, 60)
        p = [rng.uniform(-1, 1), rng.uniform(0.5, 3.0), rng.uniform(0.5, 2.0),
             rng.uniform(-1, 1)]
    elif name == "exponential_decay":
        x = np.linspace(0.0, 5.0, 60)
        p = [rng.uniform(0.5, 3.0), rng.uniform(0.5, 2.0), rng.uniform(-1, 1)]
    elif name == "damped_cosine":
        x = np.linspace(0.0, 5.0, 60)
        p = [rng.uniform(0.5, 3.0), rng.uniform(1.0, 5.0), rng.uniform(-2, 2),
             rng.uniform(0.5, 2.0), rng.uniform(-1, 1)]
    elif name == "bimodal_gaussian":
        x = np.linspace(-6.0, 6.0, 60)
        p = [rng.uniform(-3, -0.5), rng.uniform(0.5, 3), rng.uniform(0.4, 1.5),
             rng.uniform(0.2, 0.8)]
    elif name == "notch_resonator":
        x = np.linspace(-40.0, 40.0, 60)
        p = [rng.uniform(-5, 5), rng.uniform(5, 15), rng.uniform(5, 15),
             rng.uniform(0.5, 2.0), rng.uniform(-1, 1), rng.uniform(-0.005, 0.005)]
    else:  # linear
        x = np.linspace(-3.0, 3.0, 60)
        p = [rng.uniform(-1, 1), rng.uniform(-2, 2)]
    return x, np.array(p)
