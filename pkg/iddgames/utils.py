import hashlib
import logging

import numpy as np

from .data.classes import FloatArray
from .exceptions.custom_exceptions import InternalConsistencyError

logger = logging.getLogger(__name__)

# Largest excursion outside [0, 1] that is still treated as round-off.
CLAMP_TOLERANCE = 1e-9


def make_rng(seed: int) -> np.random.Generator:
    """Create the package's random generator.

    Philox is counter-based and its stream is fixed across platforms and numpy
    versions, so a seed reproduces the same instance everywhere.

    Args:
        seed (int): non-negative seed.

    Returns:
        np.random.Generator: generator over a Philox bit stream.
    """
    return np.random.Generator(np.random.Philox(seed))


def entropy_seed() -> int:
    """Draw a fresh 63-bit seed from OS entropy and log it so the run can be replayed."""
    seed = int(np.random.SeedSequence().entropy) & ((1 << 63) - 1)
    logger.info("No seed supplied, using entropy-derived seed %d", seed)
    return seed


def clamp_probabilities(values: FloatArray, what: str = "probabilities") -> FloatArray:
    """Clip values into [0, 1], tolerating only round-off.

    Args:
        values (FloatArray): values that should already be probabilities.
        what (str, optional): name used in the error message.

    Raises:
        InternalConsistencyError: if a value lies further than CLAMP_TOLERANCE outside [0, 1].

    Returns:
        FloatArray: clipped copy.
    """
    if values.size and (values.min() < -CLAMP_TOLERANCE or values.max() > 1.0 + CLAMP_TOLERANCE):
        raise InternalConsistencyError(
            f"{what} outside [0, 1] beyond round-off: min={values.min()!r}, max={values.max()!r}"
        )
    clipped: FloatArray = np.clip(values, 0.0, 1.0)
    return clipped


def graph_fingerprint(node_count: int, src: np.ndarray, dst: np.ndarray) -> str:
    """64-bit hash of a graph's node count and sorted edge arrays, as hex."""
    digest = hashlib.blake2b(digest_size=8)
    digest.update(np.int64(node_count).tobytes())
    digest.update(np.ascontiguousarray(src, dtype=np.int64).tobytes())
    digest.update(np.ascontiguousarray(dst, dtype=np.int64).tobytes())
    return digest.hexdigest()


def no_attack_mass(y: FloatArray) -> float:
    """y_0 = 1 - sum(y), snapped to 0 when negative by round-off only."""
    y0 = 1.0 - float(np.sum(y))
    return 0.0 if -1e-12 <= y0 < 0.0 else y0
