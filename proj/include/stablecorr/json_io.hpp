#pragma once

#include <json.hpp>

#include "stablecorr/fourier_pd.hpp"
#include "stablecorr/homogeneous.hpp"
#include "stablecorr/levy_measure.hpp"
#include "stablecorr/moments.hpp"
#include "stablecorr/spectral.hpp"
#include "stablecorr/verify.hpp"

namespace stablecorr {

using Json = nlohmann::json;

// Finite values as numbers, infinities as the strings "inf" / "-inf".
Json number(double x);
double parse_number(const Json& j);

Json to_json(const Seed& seed);
Json to_json(const SpectralRep& rep);
Json to_json(const LevyMeasure& gamma);
// {"norm": {"kind": "lr" | "max_abs" | "euclidean" | "levy", ...}, "p": ..., "block_k": ...}
Json to_json(const HomogeneousFn& f);
Json to_json(const MCEstimate& est);
Json to_json(const TestFunction& phi);
Json to_json(const PDReport& report);
Json to_json(const Prop1Result& r);
Json to_json(const Thm1Result& r);

// Parsers throw InvalidArgument on malformed input.
Seed seed_from_json(const Json& j);
SpectralRep spectral_rep_from_json(const Json& j);
LevyMeasure levy_measure_from_json(const Json& j);
HomogeneousFn homogeneous_from_json(const Json& j);

}  // namespace stablecorr
