"""Desk-scale procedural tower environment and a from-scratch branched-PPO stack."""

__version__ = "0.1.0"
