"""Cluster-trace workload analytics: job arrival and request forecasting, BIRCH job clustering."""

__version__ = "0.1.0"
