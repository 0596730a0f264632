from hypothesis import settings

# compiled kernels make the first call of each signature slow
settings.register_profile("default", deadline=None)
settings.load_profile("default")
