"""Chance-constrained partial set covering with an exact probability oracle."""
