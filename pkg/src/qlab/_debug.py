from __future__ import annotations

import os


def _debug_flag_enabled(flag: str) -> bool:
    flag_value = os.getenv(flag)
    return flag_value is not None and (flag_value == "1" or flag_value.lower() == "true")


def env_seed() -> int | None:
    """The QLAB_SEED override, or None when unset or unparsable. Read on every call so that
    tests and wrappers can set it late."""
    raw = os.getenv("QLAB_SEED")
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw.strip(), 0)
    except ValueError:
        return None


DISABLE_TRACING = _debug_flag_enabled("QLAB_DISABLE_TRACING")
"""Set to disable span creation for every run, regardless of RunConfig."""

LOG_WITNESS_DATA = _debug_flag_enabled("QLAB_LOG_WITNESS_DATA")
"""By default witness payloads are kept out of debug logs, since they can be large. Set this flag
to include them.
"""
