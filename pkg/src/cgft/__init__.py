"""cgft: continuous glucose and food tracker.

Library + CLI combining a fusion-based meal recognizer (per-model linear
classifiers, PSO/GA-searched fusion weights), a simulated CGM sensor pipeline
with a line-oriented ingest protocol, and a patient tracking service that maps
meals onto the glucose timeline and raises threshold alerts.
"""

__version__ = "0.1.0"
