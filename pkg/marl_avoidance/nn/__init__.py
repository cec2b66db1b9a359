"""float64 numpy networks with exact reverse-mode gradients."""
