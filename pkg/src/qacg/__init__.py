"""Classical simulation and cost modeling of quantum-accelerated conjugate gradients."""

__version__ = "0.1.0"
