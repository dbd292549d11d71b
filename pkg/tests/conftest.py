import numpy as np

from infoselect import (
    Head,
    Scorer,
    build_posterior,
    gen_synthetic,
    map_fit,
)


def random_spd(rng, n, scale=1.0):
    """Well-conditioned SPD matrix: Gram of a wide factor plus a ridge."""
    g = rng.standard_normal((n, n + 2))
    return scale * (g @ g.T / n + 0.5 * np.eye(n))


def random_psd(rng, n, rank=None):
    g = rng.standard_normal((n, rank if rank is not None else n))
    return g @ g.T


def fitted_setup(seed=0, n=45, d=3, c=3, lam=1.0, class_sep=2.0):
    """Small fitted classification problem shared across score tests."""
    data = gen_synthetic(seed, n, d, c, class_sep)
    model = map_fit(data, Head.categorical(c), lam)
    post = build_posterior(model, data, lam)
    return data, model, post, Scorer(model, post)
