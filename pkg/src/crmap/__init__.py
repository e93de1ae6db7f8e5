"""Exact computer algebra for CR maps between the Heisenberg hypersurface,
the light-cone tube models, the sphere and the type-IV domain boundary."""

__version__ = "0.1.0"
