"""Core models and helpers."""
