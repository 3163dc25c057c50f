"""Integration tests for the closed-loop safety filter."""
