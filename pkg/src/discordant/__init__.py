"""Finite-window experiments on discordant sets: sets that are large by
density yet not piecewise syndetic."""

__version__ = "0.1.0"
