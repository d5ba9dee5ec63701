"""Group-axiom violation laboratory for resolute voting rules."""

__version__ = "0.1.0"
