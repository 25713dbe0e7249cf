BNResult = compute_c_lambda = existence_window = multiplicity_count = sweep_c_lambda = None
