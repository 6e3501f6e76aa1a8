"""Zoom-transform grids and the analyses built on them.

Modules:
  buffer       image representation and the bicubic resampling kernel
  codecs       PNG/PPM decode, PPM encode, raw ZIB1 tensors
  geometry     zoom grid, center zooms, 5/10-crop, random resized crops
  store        logit/correctness matrices, label sets, ZPM1 files
  evaluation   top-1, upper-bound, heatmap, group, and sweep analytics
  cover        greedy transform minimum set cover plus brute-force oracle
  aggregation  mean/max fusion of per-crop distributions
  memo         marginal-entropy test-time adaptation on a toy scorer
  hardset      hard-benchmark filtering, annotation merge, manifest build
  mock         deterministic seeded stand-in classifier
  cli          operator command line
"""

__version__ = "0.1.0"
