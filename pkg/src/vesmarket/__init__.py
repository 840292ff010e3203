"""AI market penetration under a rising elasticity of substitution."""

__version__ = "0.1.0"
