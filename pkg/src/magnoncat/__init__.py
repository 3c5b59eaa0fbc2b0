"""Dissipative stabilization of magnonic cat states: dense Lindblad simulator,
Hamiltonian ladder for the driven cavity-magnon-qubit system, and scenario
tooling for the reference figures."""

__version__ = "0.1.0"
