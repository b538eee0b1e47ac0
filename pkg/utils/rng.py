"""
Seedable random streams shared by the mechanisms and the harness
"""
import numpy as np


class RngStream:
    """Deterministic stream of uniform, Gaussian and Laplace variates

    Identical seeds give identical variate sequences. A stream must not be
    shared between threads; parallel trials each own a child from spawn().
    """

    def __init__(self, seed=None):
        if isinstance(seed, np.random.SeedSequence):
            self.seed_sequence = seed
        else:
            self.seed_sequence = np.random.SeedSequence(seed)
        self.generator = np.random.Generator(np.random.PCG64(self.seed_sequence))

    def spawn(self, trial_index: int) -> "RngStream":
        """
        Derive the stream of one trial

        child_seed = SeedSequence(parent entropy, parent spawn key + (trial_index,))
        so the child depends only on the parent seed and the trial index.
        """
        child = np.random.SeedSequence(
            entropy=self.seed_sequence.entropy,
            spawn_key=tuple(self.seed_sequence.spawn_key) + (int(trial_index),),
        )
        return RngStream(child)

    def uniform(self, size=None):
        return self.generator.random(size)

    def standard_normal(self, size=None):
        # numpy's ziggurat sampler
        return self.generator.standard_normal(size)

    def laplace(self, scale: float, size=None):
        """Laplace(0, scale) variates by inverse CDF of the uniform stream"""
        u = self.generator.random(size) - 0.5
        if scale == 0:
            return np.zeros_like(u) if size is not None else 0.0
        # u = -0.5 would hit log1p(-1)
        tail = np.minimum(2.0 * np.abs(u), np.nextafter(1.0, 0.0))
        return -scale * np.sign(u) * np.log1p(-tail)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def permutation(self, n):
        return self.generator.permutation(n)
