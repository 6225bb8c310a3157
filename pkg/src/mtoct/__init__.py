"""Co-training of LSTM demand forecasters with evolutionary inter-task
knowledge transfer, plus the single-task baseline and comparison tooling."""

__version__ = "0.1.0"
