"""
Unit conversions and random-stream helpers shared across the simulator.
"""
import logging
from typing import Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def db_to_linear(value_db: ArrayLike) -> ArrayLike:
    """Convert a power ratio in dB to a linear ratio."""
    if isinstance(value_db, np.ndarray):
        return 10.0 ** (value_db / 10.0)
    return 10.0 ** (float(value_db) / 10.0)


def dbm_to_watts(value_dbm: ArrayLike) -> ArrayLike:
    """Convert a power level in dBm to watts."""
    if isinstance(value_dbm, np.ndarray):
        return 10.0 ** ((value_dbm - 30.0) / 10.0)
    return 10.0 ** ((float(value_dbm) - 30.0) / 10.0)


def watts_to_dbm(value_w: ArrayLike) -> ArrayLike:
    """Convert a power level in watts to dBm."""
    if isinstance(value_w, np.ndarray):
        return 10.0 * np.log10(value_w) + 30.0
    return 10.0 * float(np.log10(value_w)) + 30.0


def make_stream(seed: int, *keys: int) -> np.random.Generator:
    """
    Derive an independent random stream from a master seed.

    Streams built from the same ``(seed, keys)`` are identical; streams with
    different keys are statistically independent, so realizations can be
    generated in any order or in parallel.

    Args:
        seed: Master 64-bit seed
        *keys: Non-negative integers identifying the stream (sweep point,
            realization index, solver key, ...)

    Returns:
        A fresh numpy Generator
    """
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(seq)


def format_float(value: float) -> str:
    """Format a float with 12 significant digits."""
    return f"{float(value):.12g}"


def round_sig(value: float) -> float:
    """Round a float to 12 significant digits."""
    return float(format_float(value))


def join_vector(values: Sequence[float]) -> str:
    """Serialize a numeric vector as semicolon-joined 12-digit decimals."""
    return ";".join(format_float(v) for v in values)
