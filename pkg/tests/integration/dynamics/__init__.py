"""Integration tests for the dynamics and plant."""
