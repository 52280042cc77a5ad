""" Exit codes returned by the command line.
"""
OK = 0                      # everything went fine
USAGE = 1                   # bad command line or configuration
NUMERIC_FAILURE = 2         # a solver did not converge or was inconsistent
HYPOTHESIS_VIOLATION = 3    # the potential has no negative well
