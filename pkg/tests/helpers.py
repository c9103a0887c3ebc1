"""Shared test helpers: the domain catalog and seeded boundary samplers."""

import numpy as np

from clfkit.domains import Ball, Ellipsoid, PerturbedBall, radial_boundary_point


def catalog():
    return {
        "ball": Ball(),
        "ellipsoid": Ellipsoid((2.0, 1.0)),
        "perturbed_ball": PerturbedBall(0.05),
    }


def seeded_directions(domain, count, seed):
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(count, 2 * domain.n)).view(complex)
    return dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)


def boundary_points(domain, count, seed):
    return radial_boundary_point(domain, seeded_directions(domain, count, seed))


def shell_points(domain, count, seed, shell=0.1):
    rng = np.random.default_rng(seed)
    dirs = seeded_directions(domain, count, seed + 1)
    levels = rng.uniform(-shell, shell, size=count)
    return radial_boundary_point(domain, dirs, t=levels)
