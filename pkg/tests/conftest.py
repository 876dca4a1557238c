import hypothesis

hypothesis.settings.register_profile(
    "fastgate", max_examples=60, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.load_profile("fastgate")
