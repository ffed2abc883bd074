import numpy as np
import pytest

from costsched.dataio import split_dataset
from costsched.synth import MixtureSpec, sample_mixture


@pytest.fixture(scope="session")
def small_mixture():
    """2,000-row benchmark mixture with a 60/20/20 split."""
    X, y = sample_mixture(MixtureSpec(n=2000, rho=0.3, seed=5))
    sp = split_dataset(2000, seed=1)
    return {
        "X": X, "y": y,
        "X_tr": X[sp.train], "y_tr": y[sp.train],
        "X_val": X[sp.validation], "y_val": y[sp.validation],
        "X_te": X[sp.test], "y_te": y[sp.test],
    }


@pytest.fixture(scope="session")
def blobs():
    """Two well-separated 2-D Gaussian blobs, 500 points."""
    rng = np.random.default_rng(42)
    n = 250
    X = np.vstack([rng.normal(0.0, 1.0, (n, 2)),
                   rng.normal(4.0, 1.0, (n, 2))])
    y = np.r_[np.ones(n, int), 2 * np.ones(n, int)]
    order = rng.permutation(2 * n)
    return X[order], y[order]
