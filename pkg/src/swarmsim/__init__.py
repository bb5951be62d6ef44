"""Deterministic discrete-event simulator for clustered UAV swarm networks.

The package couples a microsecond-resolution event engine with models for
random-waypoint mobility, log-distance/Nakagami radio links, a four-state
radio energy ledger, weighted cluster-head election, a hybrid TDMA/CSMA
superframe MAC, authenticated frames, and Beta-reputation misbehavior
isolation.  Runs are reproducible: the same scenario and seed always yield
byte-identical reports.
"""

__version__ = "0.1.0"

from .engine import Simulator, EventQueue, RngStreams, SimTime

__all__ = ["Simulator", "EventQueue", "RngStreams", "SimTime", "__version__"]
