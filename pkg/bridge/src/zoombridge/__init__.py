"""Scorer bridge for zoomlens job files.

Implements the file-based exchange protocol: invoked with a single job-file
argument, scores every (image, transform) cell with the configured model,
and writes a ZPM1 logit matrix to the job's output path. Crop geometry is
recomputed here from the grid JSON with the host's documented integer
formulas, not delegated to any framework, so windows agree with the host
bit for bit.
"""

__version__ = "0.1.0"
