"""Coevolutionary adversarial quality-diversity engine."""

__version__ = "0.1.0"
