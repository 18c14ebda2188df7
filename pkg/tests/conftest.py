import random

from finalg.core import make_algebra, make_operation


def random_algebra(rng: random.Random, size: int = None):
    """One random binary and one random ternary operation on <= 3 elements."""
    if size is None:
        size = rng.choice([2, 3])
    f = make_operation("f", 2, [rng.randrange(size) for _ in range(size**2)])
    g = make_operation("g", 3, [rng.randrange(size) for _ in range(size**3)])
    return make_algebra(size, [f, g], name=f"rnd{size}")
