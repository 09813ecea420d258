"""canon-szego tools: canonical systems, entropy, weights and strings."""
