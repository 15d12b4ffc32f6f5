"""
Benchmark plumbing: experiment configs, the cell runner, aggregate reports
and the oracle verification battery.
"""
