#pragma once

#include <string>
#include <vector>

#include "qps/duality.hpp"
#include "qps/moser_poschel.hpp"
#include "qps/reducibility.hpp"
#include "qps/spectrum.hpp"

namespace qps {

// JSON schemas (numbers at full double precision):
//   potential: {"fourier": [[k, re, im], ...], "rho": float}
//   frequency: {"omega": "golden" | "silver" | float}
//   gap:       {"lo", "hi", "ids", "label", "collapsed"}
//   bloch:     {"a", "phi", "coeffs": [[re, im], ...], "decay", "residual"}

std::string potential_to_json(const Potential& v);
Potential potential_from_json(const std::string& text);

std::string frequency_to_json(const Frequency& f);
Frequency frequency_from_json(const std::string& text);

std::string gaps_to_json(const std::vector<Gap>& gaps);
std::string bloch_to_json(const std::vector<BlochWave>& states,
                          const std::vector<int>& phase_violations);
std::vector<BlochWave> bloch_from_json(const std::string& text);
/// Emits the grid samples plus the coefficient arrays and cocycle context so
/// the conjugation can be reloaded exactly.
std::string conjugation_to_json(const Conjugation& z);
Conjugation conjugation_from_json(const std::string& text);
std::string mp_report_to_json(const MPReport& r);

/// CSV with header "a,ids,ids_err,lyap,rot"; missing columns emit nan.
std::string scan_to_csv(const SpectralScan& s);
std::string duality_to_csv(const DualityReport& r);

/// %.17g rendering used by every emitter.
std::string format_double(double x);

}  // namespace qps
