"""Shared test configuration."""

from hypothesis import HealthCheck, settings

# numpy-heavy properties routinely outlive the default deadline; wall-time
# is bounded by max_examples instead
settings.register_profile(
    "package",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("package")
