"""Toolchain for the ART-9 nine-trit balanced-ternary RISC processor."""

__version__ = "0.1.0"
