"""Team-level task synthesis for heterogeneous robots from LTL with bindings."""

__version__ = "0.1.0"
