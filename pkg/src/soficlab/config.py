"""Global size caps, overridable through environment variables."""

import os


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    return int(raw)


def ball_cap() -> int:
    return _env_int("SOFICLAB_BALL_CAP", 1_000_000)


def exact_partition_cap() -> int:
    return _env_int("SOFICLAB_EXACT_CAP", 24)


def exact_table_cap() -> int:
    return _env_int("SOFICLAB_TABLE_CAP", 20)
