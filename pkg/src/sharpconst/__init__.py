"""Sharp constants of dilation-invariant integral inequalities."""

__version__ = "0.1.0"
