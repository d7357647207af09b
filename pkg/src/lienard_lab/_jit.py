"""JIT on/off switch.

Set LIENARD_LAB_DISABLE_JIT=1 to run the integrator kernels as plain Python
(useful for debugging and for the fallback benchmark). The flag is read once
at import time.
"""

import os

JIT_ENABLED = os.environ.get("LIENARD_LAB_DISABLE_JIT", "0").lower() not in (
    "1",
    "true",
    "yes",
)

if JIT_ENABLED:
    from numba import njit
else:

    def njit(func=None, **kwargs):
        if func is None:

            def wrapper(f):
                return f

            return wrapper
        return func
