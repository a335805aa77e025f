"""Numerical thresholds shared across modules."""

EPS_SYM = 1e-12        # absolute antisymmetry residual
EPS_DEG = 1e-10        # relative threshold for degenerate / vanishing quantities
PHYS_TOL = 1e-9        # largest singular value of a physical CM may exceed 1 by this
PURE_TOL = 1e-8        # ||gamma^2 + I||_F below this means pure
PARITY_TOL = 1e-10     # parity-offdiagonal weight for fermionic states
NORM_TOL = 1e-10       # unit-norm check on state vectors
EPS_NULL = 1e-10       # cumulative squared norm marking the null cone
PROB_CUTOFF = 1e-12    # branches below this probability are dropped

J2 = ((0.0, 1.0), (-1.0, 0.0))
