"""
quantum

Behavior:
    - Science packages for quantum trajectories, Bell-rate jump processes,
      decaying-atom unravelings, the chaotic rotor and thermalization models.
"""

__version__ = "0.3.0"
