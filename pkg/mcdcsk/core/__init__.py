# Baseband signal chain, closed-form analysis and Monte Carlo harness
