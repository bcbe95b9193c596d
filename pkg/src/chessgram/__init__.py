"""Skill-stratified n-gram modeling of chess move choice."""

__version__ = "0.1.0"
