"""Gossip-based primal-dual algorithms for distributed smooth convex
optimization, with a simulation harness, HTTP service, and CLI."""

from . import algorithms, config, consensus, harness, linalg, metrics, network, objectives
from .errors import GossipOptError

__all__ = [
    "algorithms",
    "config",
    "consensus",
    "harness",
    "linalg",
    "metrics",
    "network",
    "objectives",
    "GossipOptError",
]

__version__ = "0.1.0"
