"""Tests for the higher-order staircase code toolkit."""
