"""Tests for jlmquant."""
