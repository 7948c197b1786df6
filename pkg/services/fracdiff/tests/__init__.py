"""Tests for the fracdiff package."""
