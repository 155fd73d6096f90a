"""Executable game-theoretic protocol definitions and a P2P anonymous-query simulator."""

__version__ = "0.1.0"
