"""Integration tests for the trial loop, idle experiment and suite."""
