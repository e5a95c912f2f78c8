import zlib

import numpy as np


def make_rng(seed: int, stream: str) -> np.random.Generator:
    """
    Creates an independent random generator for a named sub-stream of a run seed.

    Args:
        seed (int): The run seed.
        stream (str): Sub-stream name, e.g. "shuffle", "dropout", "init", "synth".

    Returns:
        np.random.Generator: Generator whose draws depend only on (seed, stream).
    """
    return np.random.default_rng([seed, zlib.crc32(stream.encode("utf-8"))])


def format_duration(seconds: float) -> str:
    """
    Formats the duration into a readable format.

    Args:
        seconds (float): Number of seconds.

    Returns:
        str: Human-readable time format.
    """
    if seconds < 60:
        return f"{seconds:.1f}s"
    seconds = int(seconds)
    if seconds < 3600:
        return f"{seconds // 60}m {seconds % 60}s"
    return f"{seconds // 3600}h {(seconds % 3600) // 60}m"


def format_percent(value: float) -> str:
    """Formats a fraction as a percentage with two decimals, e.g. 0.3682 -> '36.82%'."""
    return f"{100.0 * value:.2f}%"
