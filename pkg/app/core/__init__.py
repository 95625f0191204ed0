"""Settings and domain errors."""
