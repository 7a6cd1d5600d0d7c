"""Coverage-guided fuzzer with an evolution-strategy mutation scheduler."""

__version__ = "0.1.0"
