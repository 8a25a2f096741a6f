"""Verification of sign-language lexical structures over tracking-derived models."""

__version__ = "0.1.0"
