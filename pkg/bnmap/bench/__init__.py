"""Random instance families and benchmark suite execution."""
