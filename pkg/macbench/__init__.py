"""
macbench - closed-form MAC models, frame timing, a discrete-event simulator of
the same access techniques, and offered-load sweeps comparing the two.
"""

__version__ = "1.0.0"
