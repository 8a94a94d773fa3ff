"""Central numerical tolerance table.

Every module and test references these constants instead of redefining its
own magic numbers. Values are absolute unless noted.
"""

# operator flag checks
HERMITIAN_ATOL = 1e-12      # max |M - M^dag|
UNITARY_ATOL = 1e-12        # max |U^dag U - 1|
DENSITY_TRACE_ATOL = 1e-12  # |tr(rho) - 1|
POSITIVITY_FLOOR = -1e-10   # min eigenvalue of a density matrix
KET_NORM_ATOL = 1e-12

# generators and propagation
TRACE_PRESERVATION_ATOL = 1e-10   # |vec(1)^dag L|
PROPAGATION_TRACE_ATOL = 1e-9     # trace drift along a trajectory
PROPAGATION_HERM_ATOL = 1e-12     # hermiticity drift before symmetrizing
KERNEL_REAL_ATOL = 1e-9           # |Re lambda| for steady-manifold eigenvalues
KERNEL_IMAG_ATOL = 1e-9           # |Im lambda| above this on the kernel: rotating manifold

# channels
CHOI_ROUNDTRIP_ATOL = 1e-12
CPTP_EIG_FLOOR = -1e-9            # min Choi eigenvalue
CPTP_TRACE_ATOL = 1e-9            # partial trace of Choi vs identity

# metrics
DIAMOND_AGREEMENT_ATOL = 1e-6     # ascent vs SDP evaluator
DIAMOND_ASCENT_FTOL = 1e-12       # ascent fixed-point stopping increment

# numerical kernels
SVD_KERNEL_ATOL = 1e-10           # singular values treated as zero
