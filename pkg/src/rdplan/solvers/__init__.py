"""Command-line adapters that run an open-source MILP solver on an MPS/LP
file and write the generic solution format read by
:func:`rdplan.solver_io.parse_solution`."""
