"""Spectrum-sharing simulator for a MIMO radar coexisting with a full-duplex
multi-user MIMO cellular system.

Subpackages / modules:
    matrix_core        dense complex matrix utilities (vec, kron, factorizations)
    channel_model      scenario geometry, fading, self-interference, uncertainty balls
    radar_nsp          null-space projection of radar waveforms
    radar_detection    GLRT detection chain, non-centrality, Marcum Q, Monte Carlo
    cellular_fd        full-duplex cellular signal model (covariances, rates, MSE)
    robust_beamforming vectorized robust forms, LMI assembly, alternating design
    sdp_engine         small primal-dual interior-point solver for block SDPs
    sim_harness        batch experiment runner and CLI
"""

__version__ = "0.1.0"
