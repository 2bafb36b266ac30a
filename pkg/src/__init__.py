"""
Weak-measurement metrology
Joint estimation of a phase and its diffusion with sequential weak
measurements, Fisher / quantum Fisher information, and a simulated
Sagnac-interferometer implementation.
"""

__version__ = "1.0.0"
