ConcentrationReport = GroundStateResult = concentration_report = minimize_sphere = recenter = sobolev_oracle = None
