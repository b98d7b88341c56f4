"""MAP instances compiled from PARTITION and MAX-2-SAT, with certified answers."""
