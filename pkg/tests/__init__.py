"""Tests for the pyhardy package."""
