"""converge: a tool-agnostic process engine for gated, adversarially
critiqued AI-assisted development."""

__version__ = "0.1.0"
