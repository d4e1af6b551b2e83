"""Physical constants (SI, CODATA exact-by-definition values)."""

HBAR = 1.054571817e-34  # J s
KB = 1.380649e-23  # J / K
