"""
Seeded random sources with a fixed, reproducible pipeline.

Every stochastic computation draws from a PCG64 stream derived from
(master seed, stream index) through numpy's SeedSequence, so results do not
depend on thread count or scheduling. Normal deviates come from the Marsaglia
polar method applied to the stream's uniform output; this pipeline is part of
the report contract and must not change within a schema version.
"""

from typing import Optional

import numpy as np

MAX_SEED = 2 ** 64 - 1


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """
    Independent generator for (master seed, stream index).

    Args:
        seed: 64-bit master seed
        index: Trial or restart index

    Returns:
        np.random.Generator: PCG64 generator

    Raises:
        ValueError: If seed or index is out of range
    """
    if not 0 <= int(seed) <= MAX_SEED:
        raise ValueError(f"Seed must be in [0, 2^64 - 1], got {seed}")
    if int(index) < 0:
        raise ValueError(f"Stream index must be >= 0, got {index}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(sequence))


def polar_normals(gen: np.random.Generator, count: int) -> np.ndarray:
    """
    Standard normal deviates by the Marsaglia polar method.

    Pairs (u, v) uniform on (-1, 1)^2 are kept when 0 < s = u^2 + v^2 < 1 and
    mapped to u·sqrt(-2 ln s / s), v·sqrt(-2 ln s / s), in draw order.
    """
    out = np.empty(0)
    while out.size < count:
        pairs = max(8, (count - out.size + 1) // 2 * 4 // 3 + 4)
        u = 2.0 * gen.random(pairs) - 1.0
        v = 2.0 * gen.random(pairs) - 1.0
        s = u * u + v * v
        accept = (s > 0.0) & (s < 1.0)
        u, v, s = u[accept], v[accept], s[accept]
        factor = np.sqrt(-2.0 * np.log(s) / s)
        batch = np.column_stack((u * factor, v * factor)).reshape(-1)
        out = np.concatenate((out, batch))
    return out[:count]


def complex_gaussian(gen: np.random.Generator, shape) -> np.ndarray:
    """Complex array with independent standard normal real and imaginary parts"""
    size = int(np.prod(shape))
    normals = polar_normals(gen, 2 * size)
    return (normals[:size] + 1j * normals[size:]).reshape(shape)


def haar_isometry(gen: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """
    Haar-distributed isometry: first `cols` columns of a Haar unitary.

    QR of a complex Gaussian matrix with the phases of R's diagonal moved into Q.
    """
    if cols > rows:
        raise ValueError(f"Isometry needs cols <= rows, got {rows}x{cols}")
    z = complex_gaussian(gen, (rows, rows))
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag))
    return q[:, :cols]


def random_density(gen: np.random.Generator, side: int, rank: Optional[int] = None) -> np.ndarray:
    """Density matrix G G^dagger / Tr(G G^dagger) for a side x rank Gaussian G"""
    g = complex_gaussian(gen, (side, rank or side))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
