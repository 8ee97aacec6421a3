import numpy as np

from app.probcore import CondDist, Dist


def random_kernel(rng, in_size: int, out_size: int, sparse: bool = False) -> CondDist:
    table = rng.dirichlet(np.ones(out_size), size=in_size)
    if sparse:
        mask = rng.random(table.shape) < 0.25
        mask[np.arange(in_size), rng.integers(out_size, size=in_size)] = False
        table = np.where(mask, 0.0, table)
        table = table / table.sum(axis=1, keepdims=True)
    return CondDist(table)


def random_dist(rng, size: int) -> Dist:
    return Dist(rng.dirichlet(np.ones(size)))
