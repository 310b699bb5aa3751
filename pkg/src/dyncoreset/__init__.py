"""Fully dynamic k-means coresets."""
