"""Spectral robustness analysis for leader-follower consensus networks."""
