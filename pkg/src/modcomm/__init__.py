"""Exact computations around commensurators of congruence subgroups of PSL(2, Z).

Modules:

* ``exact``     scalars in quadratic towers over Q and 2x2 matrices over them
* ``modgroup``  coset tables, congruence subgroups, cusps and Schreier bases
* ``freegrp``   free-group words, Magnus expansion and Fox calculus
* ``chevweil``  the action of a finite quotient on the homology of a kernel
* ``witness``   non-commensurability witnesses and filtration chains
* ``commens``   the staged necessity test for a candidate commensurating matrix
* ``galois``    field classification, conjugator reconstruction, trace obstruction
* ``cli``       command-line front end, certificates and the table cache
"""

__version__ = "0.1.0"
