import os

from hypothesis import HealthCheck, settings

# JIT warmup makes the first example of a run arbitrarily slow; wall-clock
# deadlines would turn that into flaky failures.
settings.register_profile(
    "jit-friendly", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("jit-friendly")


def full_scale_enabled() -> bool:
    return os.environ.get("CVQKD_RECON_FULL_SCALE") == "1"
