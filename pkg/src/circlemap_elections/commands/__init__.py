"""Command registration modules."""
