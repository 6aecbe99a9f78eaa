"""Time-of-arrival distributions for continuous quantum systems.

Library + CLI for turning time-dependent Born-rule densities into
arrival-time distributions: the |dF_t(a)/dt| transform, its Gaussian closed
forms, two-wave-packet superposition currents, and the Bracken-Melloy
quantum-backflow scenario with its detection-probability table.
"""

__version__ = "0.1.0"
