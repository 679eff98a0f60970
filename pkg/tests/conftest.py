from hypothesis import HealthCheck, settings

settings.register_profile(
    "fflab",
    max_examples=50,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fflab")
