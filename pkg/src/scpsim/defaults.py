"""Every tolerance, capacity and sample constant used by the package.

The CLI exposes the commonly tuned ones as flags; everything else is read
from here so there are no constants buried in the algorithms.
"""

DEFAULT_SEED = 20240611
DEFAULT_DELTA = 0.01
DEFAULT_P_TARGET = 10

# capacities (qubits / bits)
MAX_ORACLE_QUBITS = 24
MAX_EXACT_COEFFICIENT_BITS = 24
MAX_WHT_BITS = 20
MAX_DENSE_QUBITS = 12
MAX_NONZERO_CHECK_BITS = 20

# exact spectra: coefficients below this magnitude are dropped
ZERO_CUTOFF = 1e-12
NORM_TOL = 1e-9

# Kushilevitz-Mansour
KM_FRONTIER_FACTOR = 64          # capacity error above 64*theta^2 live prefixes
KM_KEEP_FACTOR = 1.0 / 8.0       # keep prefix when weight estimate > 1/(8 theta^2)
KM_LEAF_FACTOR = 3.0 / 4.0       # final coefficient filter at 3/(4 theta)
KM_HISTOGRAM_MAX_BITS = 20       # prefix length up to which buckets use a histogram + WHT

# CT/ECS estimator: median-of-means shape
MOM_GROUP_FACTOR = 18            # groups = 18 * ceil(ln(1/delta))
MOM_GROUP_SIZE_FACTOR = 6        # group size = ceil(6 / eps^2)

# commuting-access estimator: multiplier over the plain Hoeffding count
COMMUTING_SAMPLE_MULTIPLIER = 4

# sampling loops are processed in chunks of this many draws
SAMPLE_CHUNK = 1 << 18
# any single estimator needing more draws than this raises CapacityError
MAX_SAMPLES = 2_000_000_000

# JSON-lines float rendering
FLOAT_DIGITS = 17
