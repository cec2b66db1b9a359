"""Training rules for IDDPG, MADDPG, MADDPG-L, MADDPG with LSTM actors, and FACMAC."""
