"""Benchmark report export (CSV, markdown, Excel)."""
