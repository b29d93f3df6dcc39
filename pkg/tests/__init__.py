"""
Test Suite Package
Invariant, oracle and acceptance tests for the particle simulator
"""

__version__ = "1.0.0"

# Desk-scale meshes shared across the suite
TEST_CONFIG = {
    'small': dict(dt=0.05, dx=0.05, dv=0.05, L=3.0, Q=1.0, T=1.0, R=1.0, snapshot_stride=5),
    'exhausting': dict(dt=0.1, dx=0.1, dv=0.1, L=1.2, Q=1.0, T=5.0, R=1.0, snapshot_stride=0),
    'coarse_step': dict(dt=0.1, dx=0.05, dv=0.1, L=1.2, Q=1.0, T=0.5, R=1.0, snapshot_stride=0),
    'oracle': dict(dt=0.01, dx=0.05, dv=0.2, L=1.2, Q=1.0, T=1.0, R=1.0, scenario='steady', snapshot_stride=0),
}
