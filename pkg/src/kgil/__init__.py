"""Knowledge-graph grounded question answering with incremental learning."""

__version__ = "0.1.0"
