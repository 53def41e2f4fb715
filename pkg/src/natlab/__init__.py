"""natlab: a desk-scale lab for distillation-based training of toy translation models."""

__version__ = "0.1.0"
