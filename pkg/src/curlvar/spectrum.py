EigenPair = SpectralSubspace = build_Vtilde = cavity_mode_ladder = curl_curl_eigs = None
