"""Twin-beam simulation from parametric down-conversion via paired Schmidt modes."""

__version__ = "0.1.0"
