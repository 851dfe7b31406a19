"""Privacy-preserving distributed aggregation of client histograms."""
