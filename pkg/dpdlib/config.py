"""
Configuration settings for dpdlib
"""

# Transport settings (shared by the simulated and TCP backends)
TRANSPORT_SETTINGS = {
    'receive_timeout_seconds': 30.0,
    'connect_timeout_seconds': 10.0,
    'connect_retry_interval_seconds': 0.05,
    'header_format': '<IIII',  # src, dst, tag, payload length in bytes
    'word_bytes': 8,
    'listen_backlog': 64,
    'max_tag': 0xFFFFFFFF
}

# Simulated backend settings
SIMULATOR_SETTINGS = {
    'default_seed': 0,
    'thread_stack_bytes': 1024 * 1024,  # 1MB per logical PE
    'max_ranks': 4096
}

# Alpha-beta cost model settings
COST_SETTINGS = {
    't_s': 1.0e-5,  # seconds per message startup
    't_w': 1.0e-8,  # seconds per 8-byte word
    # calibrated parameters for the large-scale Floyd-Warshall trend check
    'floyd_calibration': {'t_s': 2.0e-5, 't_w': 1.6e-8, 't_c': 1.0e-9, 'n': 10080}
}

# Benchmark program settings
BENCH_SETTINGS = {
    'float_sum_rtol': 1e-12,
    'matrix_rtol': 1e-9,
    'default_matrix_size': 8,
    'graph_density': 0.3,
    'graph_weight_range': (1.0, 10.0),
    'oracle_match_verdict': 'ORACLE MATCH',
    'oracle_mismatch_verdict': 'ORACLE MISMATCH'
}
