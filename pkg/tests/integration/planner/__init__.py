"""Integration tests for the receding-horizon planner."""
