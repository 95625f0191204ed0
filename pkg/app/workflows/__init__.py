"""Multi-step simulation runs."""
