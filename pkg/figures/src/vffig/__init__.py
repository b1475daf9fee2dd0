"""Publication-style figures from vfembed CSV output.

Three standalone scripts, one per figure family:

* ``vffig-timeseries`` - per-step delay decomposition with the deadline line
* ``vffig-epdf``       - empirical PDFs of SNR, delay, cost, or bandwidth
* ``vffig-stress``     - sweep curves with 90% confidence shading

All rendering is file-to-file and deterministic (Agg backend, no embedded
timestamps): identical CSV input yields identical image bytes.
"""

import matplotlib

matplotlib.use("Agg")

__version__ = "0.1.0"
