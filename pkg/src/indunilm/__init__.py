"""Industrial NILM workbench: facility simulator, appliance-modulated
augmentation, seq2point models and evaluation protocols."""

__version__ = "0.1.0"
