"""Graph complexes for outer spaces, operad resolutions, and Harrison homology."""

__version__ = "0.1.0"
