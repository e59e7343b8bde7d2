#!/usr/bin/env python3
"""External SAT backend for lclgrid: reads a DIMACS CNF file and prints
SAT/UNSAT followed by a model line, using PySAT's CaDiCaL binding."""
import sys

from pysat.formula import CNF
from pysat.solvers import Solver


def main() -> int:
    cnf = CNF(from_file=sys.argv[1])
    with Solver(name="cadical153", bootstrap_with=cnf.clauses) as s:
        if s.solve():
            print("SAT")
            model = s.get_model() or []
            print(" ".join(str(l) for l in model) + " 0")
        else:
            print("UNSAT")
    return 0


if __name__ == "__main__":
    sys.exit(main())
