"""Graph separation boosting with exact realizability certificates."""

__version__ = "0.1.0"
