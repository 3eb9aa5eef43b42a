"""Hyper-exponential entire function with fast-escaping simply connected Fatou components."""

__version__ = "0.1.0"
